#include "reuse/network.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "reuse/error.hpp"
#include "reuse/io.hpp"
#include "reuse/rng.hpp"

namespace reuse::network {

ActivationSpec::ActivationSpec(HermiteSeries s, double relu)
    : series(std::move(s)), relu_mix(relu), d1_(hermite::derivative(series)) {}

double ActivationSpec::eval(double z) const {
    double v = hermite::eval(series, z);
    if (relu_mix != 0.0 && z > 0.0) v += relu_mix * z;
    return v;
}

double ActivationSpec::deriv(double z) const {
    double v = hermite::eval(d1_, z);
    if (relu_mix != 0.0 && z > 0.0) v += relu_mix;
    return v;
}

double activation_deriv(const ActivationSpec& spec, double z) { return spec.deriv(z); }

ActivationFamily parse_activation_family(const std::string& s) {
    if (s == "fixed") return ActivationFamily::Fixed;
    if (s == "relu") return ActivationFamily::Relu;
    if (s == "hermite_rademacher") return ActivationFamily::HermiteRademacher;
    if (s == "discrete_mixture") return ActivationFamily::DiscreteMixture;
    if (s == "general_link") return ActivationFamily::GeneralLink;
    throw Error(ErrorKind::Config, "unknown activation family '" + s + "'");
}

const char* to_string(ActivationFamily f) {
    switch (f) {
    case ActivationFamily::Fixed: return "fixed";
    case ActivationFamily::Relu: return "relu";
    case ActivationFamily::HermiteRademacher: return "hermite_rademacher";
    case ActivationFamily::DiscreteMixture: return "discrete_mixture";
    case ActivationFamily::GeneralLink: return "general_link";
    }
    return "?";
}

int activation_degree(int q, int c_q) {
    if (c_q <= 0) c_q = q;
    int c = std::max({c_q + 1, q + 2, 3});
    if (c % 2 == 0) ++c;
    return c;
}

SampledActivation sample_activation(const ActivationOptions& opt, std::uint64_t seed, std::uint64_t index) {
    if (opt.q < 1) throw Error(ErrorKind::Domain, "target degree q must be >= 1");
    Stream s(seed, StreamPurpose::Activation, index);
    const auto sign = [&s] { return s.coin() ? 1.0 : -1.0; };
    SampledActivation out;
    switch (opt.family) {
    case ActivationFamily::Fixed:
        out.spec = ActivationSpec(opt.fixed, opt.fixed_relu);
        return out;
    case ActivationFamily::Relu:
        out.spec = ActivationSpec(HermiteSeries{}, 1.0);
        return out;
    case ActivationFamily::HermiteRademacher: {
        const int C = activation_degree(opt.q, opt.c_q);
        const double r = opt.r > 0 ? opt.r : 1.0 / std::sqrt(C + 1.0);
        std::vector<double> beta(C + 1);
        for (int i = 0; i <= C; ++i) beta[i] = sign() * r;
        out.spec = ActivationSpec(HermiteSeries(std::move(beta)));
        return out;
    }
    case ActivationFamily::DiscreteMixture: {
        const int C = activation_degree(opt.q, opt.c_q);
        std::vector<double> beta(C + 1, 0.0);
        out.branch = s.coin() ? 1 : 0;
        if (out.branch == 0) {
            beta[1] = sign();
            for (int j = 2; j <= C; ++j) beta[j] = sign() * opt.c;
        } else {
            for (int j = 1; j <= C - 2; ++j) beta[j] = sign() * opt.c;
            beta[C - 1] = beta[C] = sign();
        }
        out.spec = ActivationSpec(HermiteSeries(std::move(beta)));
        return out;
    }
    case ActivationFamily::GeneralLink: {
        const int ps = opt.p_star, I = opt.power;
        if (ps < 1 || I < 1) throw Error(ErrorKind::Domain, "general_link needs p* >= 1 and I >= 1");
        out.branch = s.coin() ? 1 : 0;
        std::vector<double> beta;
        if (out.branch == 0) {
            beta.assign(std::max(2, ps + I), 0.0);
            beta[1] = sign();
            for (int j = 2; j <= ps + I - 1; ++j) beta[j] = sign() * opt.c;
        } else {
            const int top = std::max({ps + I, opt.p, 2});
            beta.assign(top + 1, 0.0);
            beta[1] = sign();
            beta[2] = sign() * opt.c;
            for (int j = 3; j <= top; ++j) beta[j] = sign() * opt.c * opt.c;
        }
        double relu = 0.0;
        if (s.coin()) {
            relu = opt.c_relu > 0 ? opt.c_relu : std::pow(std::log(std::max(opt.d, 3)), -2.0);
        }
        out.spec = ActivationSpec(HermiteSeries(std::move(beta)), relu);
        return out;
    }
    }
    throw Error(ErrorKind::Config, "unknown activation family");
}

NetworkState init_network(int N, int d, double c_a, std::uint64_t seed) {
    if (N < 1 || d < 2) throw Error(ErrorKind::Domain, "init_network needs N >= 1 and d >= 2");
    NetworkState st;
    st.W.resize(N, d);
    const std::uint64_t blocks = Stream::blocks_for_normals(static_cast<std::uint64_t>(d));
    std::vector<double> buf(d);
    for (int j = 0; j < N; ++j) {
        Stream s(seed, StreamPurpose::Init, 0, static_cast<std::uint64_t>(j) * blocks);
        s.fill_normal(buf);
        double nrm = 0.0;
        for (double v : buf) nrm += v * v;
        nrm = std::sqrt(nrm);
        for (int k = 0; k < d; ++k) st.W(j, k) = buf[k] / nrm;
    }
    st.W_prev_even = st.W;
    st.a.resize(N);
    Stream signs(seed, StreamPurpose::Init, 1);
    for (int j = 0; j < N; ++j) st.a[j] = signs.coin() ? c_a : -c_a;
    st.b = Vector::Zero(N);
    return st;
}

void assign_activations(NetworkState& state, const ActivationOptions& opt, std::uint64_t seed,
                        std::vector<int>* branches) {
    const int N = state.width();
    state.activations.clear();
    state.activations.reserve(N);
    if (branches) branches->assign(N, 0);
    for (int j = 0; j < N; ++j) {
        auto draw = sample_activation(opt, seed, static_cast<std::uint64_t>(j));
        state.activations.push_back(std::move(draw.spec));
        if (branches) (*branches)[j] = draw.branch;
    }
}

void sample_biases(NetworkState& state, double C_b, std::uint64_t seed) {
    Stream s(seed, StreamPurpose::Bias);
    for (int j = 0; j < state.width(); ++j) state.b[j] = C_b * (2.0 * s.uniform() - 1.0);
}

double forward(const NetworkState& state, const double* x) {
    const int N = state.width(), d = state.dim();
    double f = 0.0;
    for (int j = 0; j < N; ++j) {
        const double* w = state.W.row(j).data();
        double z = state.b[j];
        for (int k = 0; k < d; ++k) z += w[k] * x[k];
        f += state.a[j] * state.activations[j].eval(z);
    }
    return f / N;
}

Vector forward_batch(const NetworkState& state, const Matrix& X) {
    Vector f(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) f[i] = forward(state, X.row(i).data());
    return f;
}

Matrix squared_loss_gradient(const NetworkState& state, const Matrix& X, const Vector& y) {
    const int N = state.width(), d = state.dim();
    const auto B = X.rows();
    Matrix G = Matrix::Zero(N, d);
    for (Eigen::Index i = 0; i < B; ++i) {
        const double r = forward(state, X.row(i).data()) - y[i];
        for (int j = 0; j < N; ++j) {
            const double z = state.W.row(j).dot(X.row(i)) + state.b[j];
            const double c = 2.0 * r * state.a[j] * state.activations[j].deriv(z) / (N * static_cast<double>(B));
            G.row(j) += c * X.row(i);
        }
    }
    return G;
}

Vector overlaps(const NetworkState& state, const Vector& theta) {
    Vector k(state.width());
    for (int j = 0; j < state.width(); ++j) k[j] = state.W.row(j).dot(theta) / state.W.row(j).norm();
    return k;
}

namespace {

io::Json matrix_json(const Matrix& m) {
    io::Json rows = io::Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        io::Json r = io::Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
        rows.push_back(std::move(r));
    }
    return rows;
}

Matrix matrix_from(const io::Json& j, int d) {
    Matrix m(j.size(), d);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (static_cast<int>(j[i].size()) != d) throw Error(ErrorKind::Io, "checkpoint: ragged weight matrix");
        for (int k = 0; k < d; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

}  // namespace

void save_checkpoint(std::ostream& os, const NetworkState& state, const CheckpointMeta& meta) {
    io::Json j;
    j["format"] = "reuse-sgd-checkpoint/1";
    j["N"] = state.width();
    j["d"] = state.dim();
    j["step"] = state.step;
    j["seed"] = meta.seed;
    j["samples_consumed"] = meta.samples_consumed;
    j["W"] = matrix_json(state.W);
    j["W_prev_even"] = matrix_json(state.W_prev_even);
    j["a"] = std::vector<double>(state.a.data(), state.a.data() + state.a.size());
    j["b"] = std::vector<double>(state.b.data(), state.b.data() + state.b.size());
    io::Json acts = io::Json::array();
    for (const auto& s : state.activations) {
        acts.push_back({{"beta", s.series.coeffs()}, {"relu_mix", s.relu_mix}});
    }
    j["activations"] = std::move(acts);
    os << io::dump(j) << '\n';
}

NetworkState load_checkpoint(std::istream& is, CheckpointMeta* meta) {
    io::Json j;
    try {
        j = io::Json::parse(is);
    } catch (const io::Json::parse_error& e) {
        throw Error(ErrorKind::Io, std::string("checkpoint: ") + e.what());
    }
    if (j.value("format", "") != "reuse-sgd-checkpoint/1") throw Error(ErrorKind::Io, "checkpoint: unknown format");
    const int d = j.at("d").get<int>();
    NetworkState st;
    st.W = matrix_from(j.at("W"), d);
    st.W_prev_even = matrix_from(j.at("W_prev_even"), d);
    const auto a = j.at("a").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    st.a = Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
    st.b = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    st.step = j.at("step").get<std::uint64_t>();
    for (const auto& s : j.at("activations")) {
        st.activations.emplace_back(HermiteSeries(s.at("beta").get<std::vector<double>>()), s.at("relu_mix").get<double>());
    }
    const auto N = st.W.rows();
    if (st.W_prev_even.rows() != N || st.a.size() != N || st.b.size() != N ||
        static_cast<Eigen::Index>(st.activations.size()) != N) {
        throw Error(ErrorKind::Io, "checkpoint: inconsistent neuron counts");
    }
    if (meta) {
        meta->seed = j.at("seed").get<std::uint64_t>();
        meta->samples_consumed = j.at("samples_consumed").get<std::uint64_t>();
    }
    return st;
}

}  // namespace reuse::network
