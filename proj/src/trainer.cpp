#include "reuse/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "reuse/error.hpp"

namespace reuse::trainer {

TrainMode parse_train_mode(const std::string& s) {
    if (s == "paired" || s == "paired_reuse") return TrainMode::PairedReuse;
    if (s == "online") return TrainMode::Online;
    if (s == "full-batch" || s == "full_batch") return TrainMode::FullBatch;
    throw Error(ErrorKind::Config, "unknown training mode '" + s + "'");
}

const char* to_string(TrainMode m) {
    switch (m) {
    case TrainMode::PairedReuse: return "paired";
    case TrainMode::Online: return "online";
    case TrainMode::FullBatch: return "full-batch";
    }
    return "?";
}

double resolve_c_xi(const TrainSchedule& s, int d) { return s.xi_weak > 0 ? s.xi_weak : 0.1 / std::log(d); }

double weak_xi(const TrainSchedule& s, int d, int p_star) {
    const double e = std::max(0, p_star - 2) / 2.0;
    return 1.0 - resolve_c_xi(s, d) * std::pow(d, -e);
}

double resolve_c_a(const TrainSchedule& s, int d, int p_star) {
    return s.c_a > 0 ? s.c_a : std::pow(d, -(p_star - 1) / 2.0);
}

double resolve_C_b(const TrainSchedule& s, int d) { return s.C_b > 0 ? s.C_b : 4.0 * std::sqrt(std::log(d)); }

double raw_rate(double c_eta, int d, int N, double c_a) { return (c_eta / d) * N / (2.0 * c_a); }

double top_decile_mean(const Vector& kappa) {
    const auto n = kappa.size();
    if (n == 0) return 0.0;
    std::vector<double> v(kappa.data(), kappa.data() + n);
    for (double& x : v) x = std::abs(x);
    const auto k = static_cast<std::ptrdiff_t>((n + 9) / 10);
    std::partial_sort(v.begin(), v.begin() + k, v.end(), std::greater<>());
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < k; ++i) s += v[i];
    return s / static_cast<double>(k);
}

Checkpoint make_checkpoint(const network::NetworkState& st, const Vector& theta, std::int64_t samples,
                           const std::string& phase) {
    Checkpoint c;
    c.step = static_cast<std::int64_t>(st.step);
    c.samples = samples;
    c.phase = phase;
    c.kappa = network::overlaps(st, theta);
    c.top_decile = top_decile_mean(c.kappa);
    c.mean_abs = c.kappa.cwiseAbs().mean();
    return c;
}

void write_record(std::ostream& os, const RunRecord& rec) {
    io::Json head;
    head["type"] = "run";
    head["config"] = rec.config;
    head["seeds"] = rec.seeds;
    os << io::dump(head) << '\n';
    for (const auto& c : rec.checkpoints) {
        io::Json j;
        j["type"] = "checkpoint";
        j["step"] = c.step;
        j["samples"] = c.samples;
        j["phase"] = c.phase;
        j["top_decile"] = c.top_decile;
        j["mean_abs"] = c.mean_abs;
        j["kappa"] = std::vector<double>(c.kappa.data(), c.kappa.data() + c.kappa.size());
        os << io::dump(j) << '\n';
    }
    io::Json tail;
    tail["type"] = "summary";
    tail["test_error"] = rec.test_error ? io::Json(*rec.test_error) : io::Json(nullptr);
    tail["test_error_se"] = rec.test_error_se ? io::Json(*rec.test_error_se) : io::Json(nullptr);
    tail["lambda"] = rec.lambda ? io::Json(*rec.lambda) : io::Json(nullptr);
    io::Json rt = io::Json::object();
    for (const auto& [k, v] : rec.recovery_samples) rt[k] = v ? io::Json(*v) : io::Json(nullptr);
    tail["recovery_samples"] = std::move(rt);
    tail["wall_clock_s"] = rec.wall_clock_s;
    os << io::dump(tail) << '\n';
}

RunRecord read_record(std::istream& is) {
    RunRecord rec;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = io::Json::parse(line);
        const auto type = j.at("type").get<std::string>();
        if (type == "run") {
            rec.config = j.at("config");
            rec.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
        } else if (type == "checkpoint") {
            Checkpoint c;
            c.step = j.at("step").get<std::int64_t>();
            c.samples = j.at("samples").get<std::int64_t>();
            c.phase = j.at("phase").get<std::string>();
            c.top_decile = j.at("top_decile").get<double>();
            c.mean_abs = j.at("mean_abs").get<double>();
            const auto k = j.at("kappa").get<std::vector<double>>();
            c.kappa = Eigen::Map<const Vector>(k.data(), static_cast<Eigen::Index>(k.size()));
            rec.checkpoints.push_back(std::move(c));
        } else if (type == "summary") {
            if (!j.at("test_error").is_null()) rec.test_error = j["test_error"].get<double>();
            if (!j.at("test_error_se").is_null()) rec.test_error_se = j["test_error_se"].get<double>();
            if (!j.at("lambda").is_null()) rec.lambda = j["lambda"].get<double>();
            for (const auto& [k, v] : j.at("recovery_samples").items()) {
                rec.recovery_samples[k] = v.is_null() ? std::nullopt : std::optional<std::int64_t>(v.get<std::int64_t>());
            }
            rec.wall_clock_s = j.at("wall_clock_s").get<double>();
        } else {
            throw Error(ErrorKind::Io, "record: unknown line type '" + type + "'");
        }
    }
    return rec;
}

namespace {

void normalize_rows(Matrix& W) {
    for (Eigen::Index j = 0; j < W.rows(); ++j) {
        const double n = W.row(j).norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw Error(ErrorKind::Numeric, "weight row " + std::to_string(j) + " has zero or non-finite norm");
        }
        W.row(j) /= n;
    }
}

std::int64_t cadence(std::int64_t total, int max_checkpoints) {
    return std::max<std::int64_t>(1, total / std::max(1, max_checkpoints));
}

}  // namespace

void begin_pair(network::NetworkState& st, double xi) {
    if (st.step > 0 && xi != 0.0) st.W -= xi * (st.W - st.W_prev_even);
    normalize_rows(st.W);
    st.W_prev_even = st.W;
}

void pair_sgd(network::NetworkState& st, const model::Batch& batch, double raw_eta_even, double raw_eta_odd,
              LossMode loss, Backend backend, kernels::Workspace& ws) {
    kernels::sgd_step(st, batch.x, batch.y, raw_eta_even, loss, st.W_prev_even, backend, ws);
    kernels::sgd_step(st, batch.x, batch.y, raw_eta_odd, loss, st.W_prev_even, backend, ws);
    st.step += 2;
}

void phase1_pair_step(network::NetworkState& st, const model::Batch& batch, double raw_eta, double xi,
                      LossMode loss, Backend backend, kernels::Workspace& ws) {
    begin_pair(st, xi);
    pair_sgd(st, batch, raw_eta, raw_eta, loss, backend, ws);
}

void run_phase1(network::NetworkState& st, const TrainSchedule& s, PhaseContext ctx, RunRecord& rec) {
    const int d = st.dim(), N = st.width();
    const double c_a = resolve_c_a(s, d, ctx.p_star);
    const double eta_weak = raw_rate(s.eta_phase1_weak, d, N, c_a);
    const double eta_strong = raw_rate(s.eta_phase1_strong, d, N, c_a);
    const double xi_w = weak_xi(s, d, ctx.p_star);
    const std::int64_t total = s.T11 + s.T12;
    const std::int64_t every = cadence(total, s.max_checkpoints);
    const std::int64_t base = static_cast<std::int64_t>(ctx.data->consumed());
    kernels::Workspace ws;

    // The interpolation at the start of pair p undoes part of pair p - 1, so it
    // uses the xi of the phase pair p - 1 belonged to.
    double xi_prev = xi_w;
    for (std::int64_t p = 0;; ++p) {
        begin_pair(st, xi_prev);
        const bool last = p == total;
        const std::string phase = p == 0 ? "init" : (p <= s.T11 ? "weak" : "strong");
        if (p % every == 0 || last || p == s.T11) {
            rec.checkpoints.push_back(
                make_checkpoint(st, *ctx.theta, static_cast<std::int64_t>(ctx.data->consumed()) - base, phase));
        }
        if (last) break;
        const model::Batch batch = ctx.data->next(s.batch_size);
        if (p < s.T11) {
            pair_sgd(st, batch, eta_weak, eta_weak, s.loss, s.backend, ws);
            xi_prev = xi_w;
        } else {
            pair_sgd(st, batch, eta_strong, s.strong_phase_odd_step_eta_zero ? 0.0 : eta_strong, s.loss, s.backend, ws);
            xi_prev = s.xi_strong;
        }
    }
}

namespace {

void run_single_steps(network::NetworkState& st, const TrainSchedule& s, PhaseContext ctx, RunRecord& rec,
                      const model::Batch* fixed, const char* phase) {
    const int d = st.dim(), N = st.width();
    const double c_a = resolve_c_a(s, d, ctx.p_star);
    const double eta = raw_rate(s.eta_phase1_weak, d, N, c_a);
    const std::int64_t every = cadence(s.steps, s.max_checkpoints);
    const std::int64_t base = static_cast<std::int64_t>(ctx.data->consumed()) - (fixed ? fixed->x.rows() : 0);
    kernels::Workspace ws;
    for (std::int64_t t = 0;; ++t) {
        normalize_rows(st.W);
        st.W_prev_even = st.W;
        const bool last = t == s.steps;
        if (t % every == 0 || last) {
            rec.checkpoints.push_back(make_checkpoint(st, *ctx.theta,
                                                      static_cast<std::int64_t>(ctx.data->consumed()) - base,
                                                      t == 0 ? "init" : phase));
        }
        if (last) break;
        if (fixed) {
            kernels::sgd_step(st, fixed->x, fixed->y, eta, s.loss, st.W_prev_even, s.backend, ws);
        } else {
            const model::Batch b = ctx.data->next(s.batch_size);
            kernels::sgd_step(st, b.x, b.y, eta, s.loss, st.W_prev_even, s.backend, ws);
        }
        st.step += 1;
    }
}

}  // namespace

void run_online_baseline(network::NetworkState& st, const TrainSchedule& s, PhaseContext ctx, RunRecord& rec) {
    run_single_steps(st, s, ctx, rec, nullptr, "online");
}

void run_full_batch(network::NetworkState& st, const TrainSchedule& s, PhaseContext ctx, RunRecord& rec) {
    if (s.full_batch_n <= 0) throw Error(ErrorKind::Config, "full-batch mode needs full_batch_n > 0");
    const model::Batch fixed = ctx.data->next(static_cast<int>(s.full_batch_n));
    run_single_steps(st, s, ctx, rec, &fixed, "full_batch");
}

Matrix feature_matrix(const network::NetworkState& st, const Matrix& X) {
    const int N = st.width();
    Matrix Psi(X.rows(), N);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (int j = 0; j < N; ++j) {
            Psi(i, j) = st.activations[j].eval(st.W.row(j).dot(X.row(i)) + st.b[j]);
        }
    }
    return Psi;
}

RidgeResult ridge_solve(const Matrix& Psi, const Vector& y, double lambda) {
    const auto T2 = Psi.rows();
    const auto N = Psi.cols();
    if (T2 == 0) throw Error(ErrorKind::Domain, "ridge: T2 must be positive");
    if (lambda < 0) throw Error(ErrorKind::Domain, "ridge: lambda must be nonnegative");
    const double n = static_cast<double>(N), t = static_cast<double>(T2);
    Eigen::MatrixXd A = Psi.transpose() * Psi / (n * n * t);
    A.diagonal().array() += lambda;
    const Vector rhs = Psi.transpose() * y / (n * t);
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::Numeric, "ridge: normal matrix is not positive definite (lambda = " +
                                            io::format_double(lambda) + ")");
    }
    RidgeResult r;
    r.a = llt.solve(rhs);
    r.lambda = lambda;
    const Vector resid = Psi * r.a / n - y;
    r.stationarity = (Psi.transpose() * resid / (n * t) + lambda * r.a).norm();
    r.train_mse = resid.squaredNorm() / t;
    if (!r.a.allFinite()) throw Error(ErrorKind::Numeric, "ridge: non-finite solution");
    return r;
}

double default_lambda(const network::NetworkState& st, const model::Batch& probe, std::int64_t T2) {
    const Matrix Psi = feature_matrix(st, probe.x);
    const double m4 = Psi.rowwise().squaredNorm().array().square().mean();
    const double N = st.width();
    return std::sqrt(m4 / static_cast<double>(T2)) / (N * N);
}

RidgeResult phase2_ridge(network::NetworkState& st, model::DataSource& data, std::int64_t T2, double lambda,
                         double C_b, std::uint64_t seed) {
    if (T2 <= 0) throw Error(ErrorKind::Domain, "ridge: T2 must be positive");
    network::sample_biases(st, C_b, seed);
    if (lambda < 0) {
        const model::Batch probe = model::sample_batch(data.link(), data.theta(), 1024, data.config(), 0,
                                                       StreamPurpose::Probe);
        lambda = default_lambda(st, probe, T2);
    }
    const model::Batch batch = data.next(static_cast<int>(T2));
    RidgeResult r = ridge_solve(feature_matrix(st, batch.x), batch.y, lambda);
    st.a = r.a;
    return r;
}

}  // namespace reuse::trainer
