#include "reuse/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "reuse/error.hpp"

namespace reuse::experiments {

ErrorEstimate test_error(const network::NetworkState& st, const model::LinkSpec& link, const Vector& theta,
                         std::uint64_t n_mc, std::uint64_t seed) {
    if (n_mc == 0) throw Error(ErrorKind::Domain, "test_error: n_mc must be positive");
    const model::DataConfig cfg{static_cast<int>(theta.size()), 0.0, seed};
    double sum = 0.0, sumsq = 0.0;
    constexpr std::uint64_t chunk = 4096;
    for (std::uint64_t start = 0; start < n_mc; start += chunk) {
        const int n = static_cast<int>(std::min(chunk, n_mc - start));
        const model::Batch b = model::sample_batch(link, theta, n, cfg, start, StreamPurpose::Test);
        const Vector f = network::forward_batch(st, b.x);
        for (int i = 0; i < n; ++i) {
            const double e = (f[i] - b.y[i]) * (f[i] - b.y[i]);
            sum += e;
            sumsq += e * e;
        }
    }
    const double n = static_cast<double>(n_mc);
    ErrorEstimate out;
    out.mean = sum / n;
    const double var = n_mc > 1 ? std::max(0.0, (sumsq - sum * out.mean) / (n - 1.0)) : 0.0;
    out.se = std::sqrt(var / n);
    return out;
}

Statistic parse_statistic(const std::string& s) {
    if (s == "top_decile") return Statistic::TopDecile;
    if (s == "per_neuron_first") return Statistic::PerNeuronFirst;
    throw Error(ErrorKind::Config, "unknown statistic '" + s + "'");
}

std::optional<std::size_t> recovery_time(const trainer::RunRecord& rec, double threshold, Statistic stat) {
    if (rec.checkpoints.empty()) throw Error(ErrorKind::Domain, "recovery_time: empty record");
    for (std::size_t i = 0; i < rec.checkpoints.size(); ++i) {
        const auto& c = rec.checkpoints[i];
        const double v = stat == Statistic::TopDecile ? c.top_decile : c.kappa.cwiseAbs().maxCoeff();
        if (v >= threshold) return i;
    }
    return std::nullopt;
}

ScalingFit fit_scaling(const std::map<int, double>& taus) {
    std::vector<double> xs, ys;
    for (const auto& [d, t] : taus) {
        if (d > 0 && std::isfinite(t) && t > 0) {
            xs.push_back(std::log(static_cast<double>(d)));
            ys.push_back(std::log(t));
        }
    }
    if (xs.size() < 3) throw Error(ErrorKind::Domain, "fit_scaling: need at least 3 finite points");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0) throw Error(ErrorKind::Domain, "fit_scaling: all d values coincide");
    ScalingFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

io::Json to_json(const RunConfig& c) {
    const auto& s = c.schedule;
    const auto& a = c.activation;
    io::Json j;
    j["link"] = {{"hermite", c.link.coeffs()},
                 {"direction", c.direction == model::DirectionMode::Axis ? "axis" : "random"},
                 {"power_cap", c.power_cap}};
    j["data"] = {{"d", c.d}, {"noise_std", c.noise_std}};
    j["network"] = {{"N", c.N},
                    {"activation", network::to_string(a.family)},
                    {"c_q", a.c_q},
                    {"c", a.c},
                    {"r", a.r},
                    {"c_relu", a.c_relu},
                    {"fixed", a.fixed.coeffs()},
                    {"fixed_relu", a.fixed_relu}};
    j["trainer"] = {{"mode", trainer::to_string(s.mode)},
                    {"eta_weak", s.eta_phase1_weak},
                    {"eta_strong", s.eta_phase1_strong},
                    {"c_xi", s.xi_weak},
                    {"xi_strong", s.xi_strong},
                    {"strong_odd_eta_zero", s.strong_phase_odd_step_eta_zero},
                    {"T11", s.T11},
                    {"T12", s.T12},
                    {"T2", s.T2},
                    {"lambda", s.lambda},
                    {"batch_size", s.batch_size},
                    {"loss", kernels::to_string(s.loss)},
                    {"c_a", s.c_a},
                    {"C_b", s.C_b},
                    {"steps", s.steps},
                    {"full_batch_n", s.full_batch_n},
                    {"max_checkpoints", s.max_checkpoints},
                    {"backend", kernels::to_string(s.backend)}};
    j["run"] = {{"seed", c.seed}, {"test_samples", c.test_samples}, {"thresholds", c.thresholds}};
    return j;
}

namespace {

std::string threshold_key(double t) { return "top_decile@" + io::format_double(t); }

}  // namespace

RunOutput run_single(const RunConfig& cfg, const Resume* resume) {
    const auto t0 = std::chrono::steady_clock::now();
    const model::LinkSpec link = model::LinkSpec::make(cfg.link, true, cfg.power_cap);
    const Vector theta = model::make_direction(cfg.d, cfg.direction, cfg.seed);

    const trainer::TrainSchedule& s = cfg.schedule;
    const double c_a = trainer::resolve_c_a(s, cfg.d, link.p_star());
    network::NetworkState st;
    network::ActivationOptions opt = cfg.activation;
    opt.q = link.degree;
    opt.d = cfg.d;
    opt.p = link.info_exponent;
    opt.p_star = link.p_star();
    opt.power = link.power();
    if (opt.family == network::ActivationFamily::Fixed && opt.fixed.is_zero()) opt.fixed = link.series;
    if (resume) {
        st = resume->state;
        if (st.dim() != cfg.d) throw Error(ErrorKind::Config, "resumed state has dimension " + std::to_string(st.dim()));
    } else {
        st = network::init_network(cfg.N, cfg.d, c_a, cfg.seed);
        network::assign_activations(st, opt, cfg.seed);
    }

    RunOutput out;
    trainer::RunRecord& rec = out.record;
    rec.config = to_json(cfg);
    rec.config["resolved"] = {{"c_a", c_a},
                              {"xi_weak", trainer::weak_xi(s, cfg.d, link.p_star())},
                              {"C_b", trainer::resolve_C_b(s, cfg.d)},
                              {"information_exponent", link.info_exponent},
                              {"p_star", link.p_star()},
                              {"power", link.power()}};
    rec.seeds["run"] = cfg.seed;

    const model::DataConfig data_cfg{cfg.d, cfg.noise_std, cfg.seed};
    model::DataSource train(link, theta, data_cfg, StreamPurpose::Data);
    if (resume) train.seek(resume->samples_consumed);
    const trainer::PhaseContext ctx{&train, &theta, link.p_star()};
    switch (s.mode) {
    case trainer::TrainMode::PairedReuse: trainer::run_phase1(st, s, ctx, rec); break;
    case trainer::TrainMode::Online: trainer::run_online_baseline(st, s, ctx, rec); break;
    case trainer::TrainMode::FullBatch: trainer::run_full_batch(st, s, ctx, rec); break;
    }

    out.samples_consumed = train.consumed();
    out.phase1_state = st;

    if (s.T2 > 0) {
        model::DataSource ridge(link, theta, data_cfg, StreamPurpose::Ridge);
        const auto r = trainer::phase2_ridge(st, ridge, s.T2, s.lambda, trainer::resolve_C_b(s, cfg.d), cfg.seed);
        rec.lambda = r.lambda;
        const auto te = test_error(st, link, theta, cfg.test_samples, cfg.seed);
        rec.test_error = te.mean;
        rec.test_error_se = te.se;
    }
    for (double t : cfg.thresholds) {
        const auto idx = recovery_time(rec, t, Statistic::TopDecile);
        rec.recovery_samples[threshold_key(t)] =
            idx ? std::optional<std::int64_t>(rec.checkpoints[*idx].samples) : std::nullopt;
    }
    rec.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.state = std::move(st);
    return out;
}

RunConfig cell_config(const SweepGrid& grid, int d, std::int64_t n, trainer::TrainMode mode, int s) {
    RunConfig c = grid.base;
    c.d = d;
    c.seed = grid.base.seed + static_cast<std::uint64_t>(s);
    auto& sc = c.schedule;
    sc.mode = mode;
    const std::int64_t B = std::max(1, sc.batch_size);
    switch (mode) {
    case trainer::TrainMode::PairedReuse: {
        const std::int64_t pairs = n / B;
        sc.T12 = static_cast<std::int64_t>(std::llround(grid.strong_fraction * static_cast<double>(pairs)));
        sc.T11 = pairs - sc.T12;
        break;
    }
    case trainer::TrainMode::Online: sc.steps = n / B; break;
    case trainer::TrainMode::FullBatch: sc.full_batch_n = n; break;
    }
    return c;
}

SweepResult run_sweep(const SweepGrid& grid, int parallelism) {
    if (grid.d_values.empty() || grid.n_values.empty() || grid.modes.empty() || grid.seeds < 1) {
        throw Error(ErrorKind::Config, "sweep grid is empty");
    }
    SweepResult res;
    for (auto mode : grid.modes) {
        for (int d : grid.d_values) {
            for (auto n : grid.n_values) {
                for (int s = 0; s < grid.seeds; ++s) res.cells.push_back({d, n, mode, s, std::nullopt, {}});
            }
        }
    }
    const long ncell = static_cast<long>(res.cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, parallelism))
    for (long k = 0; k < ncell; ++k) {
        auto& cell = res.cells[k];
        try {
            RunConfig c = cell_config(grid, cell.d, cell.n, cell.mode, cell.seed_index);
            if (parallelism > 1) c.schedule.backend = trainer::Backend::Serial;
            cell.record = run_single(c).record;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }

    // Aggregate over seeds in cell order.
    std::size_t k = 0;
    while (k < res.cells.size()) {
        const auto& head = res.cells[k];
        std::map<std::string, std::vector<double>> vals;
        std::size_t e = k;
        while (e < res.cells.size() && res.cells[e].d == head.d && res.cells[e].n == head.n &&
               res.cells[e].mode == head.mode) {
            if (const auto& r = res.cells[e].record) {
                vals["top_decile"].push_back(r->checkpoints.back().top_decile);
                vals["mean_abs"].push_back(r->checkpoints.back().mean_abs);
                if (r->test_error) vals["test_error"].push_back(*r->test_error);
            }
            ++e;
        }
        for (const char* stat : {"top_decile", "mean_abs", "test_error"}) {
            const auto& v = vals[stat];
            if (v.empty()) continue;
            HeatmapRow row{head.d, head.n, std::string(trainer::to_string(head.mode)) + ":" + stat, 0.0, 0.0,
                           static_cast<int>(v.size())};
            for (double x : v) row.mean += x;
            row.mean /= static_cast<double>(v.size());
            for (double x : v) row.std += (x - row.mean) * (x - row.mean);
            row.std = v.size() > 1 ? std::sqrt(row.std / static_cast<double>(v.size() - 1)) : 0.0;
            res.heatmap.push_back(row);
        }
        k = e;
    }
    return res;
}

void write_heatmap_csv(std::ostream& os, const std::vector<HeatmapRow>& rows) {
    os << "d,n,stat,mean,std,count\n";
    for (const auto& r : rows) {
        os << r.d << ',' << r.n << ',' << r.stat << ',' << io::format_double(r.mean) << ','
           << io::format_double(r.std) << ',' << r.count << '\n';
    }
}

void write_heatmap_svg(std::ostream& os, const std::vector<HeatmapRow>& rows, const std::string& stat) {
    std::vector<int> ds;
    std::vector<std::int64_t> ns;
    double lo = 0, hi = 0;
    bool any = false;
    for (const auto& r : rows) {
        if (r.stat != stat) continue;
        ds.push_back(r.d);
        ns.push_back(r.n);
        lo = any ? std::min(lo, r.mean) : r.mean;
        hi = any ? std::max(hi, r.mean) : r.mean;
        any = true;
    }
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    const int cw = 60, ch = 40, ml = 70, mt = 30;
    const int W = ml + cw * static_cast<int>(ns.size()) + 20;
    const int H = mt + ch * static_cast<int>(ds.size()) + 50;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<text x=\"" << ml << "\" y=\"18\" font-size=\"13\">" << stat << "</text>\n";
    for (const auto& r : rows) {
        if (r.stat != stat) continue;
        const auto col = std::find(ns.begin(), ns.end(), r.n) - ns.begin();
        const auto row = std::find(ds.begin(), ds.end(), r.d) - ds.begin();
        const double t = hi > lo ? (r.mean - lo) / (hi - lo) : 0.5;
        const int red = static_cast<int>(std::lround(255 * t)), blue = 255 - red;
        os << "<rect x=\"" << ml + cw * col << "\" y=\"" << mt + ch * row << "\" width=\"" << cw << "\" height=\""
           << ch << "\" fill=\"rgb(" << red << ",64," << blue << ")\"/>\n";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", r.mean);
        os << "<text x=\"" << ml + cw * col + 6 << "\" y=\"" << mt + ch * row + 24
           << "\" font-size=\"11\" fill=\"white\">" << buf << "</text>\n";
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        os << "<text x=\"4\" y=\"" << mt + ch * static_cast<int>(i) + 24 << "\" font-size=\"11\">d=" << ds[i]
           << "</text>\n";
    }
    for (std::size_t i = 0; i < ns.size(); ++i) {
        os << "<text x=\"" << ml + cw * static_cast<int>(i) + 4 << "\" y=\"" << mt + ch * static_cast<int>(ds.size()) + 18
           << "\" font-size=\"11\">n=" << ns[i] << "</text>\n";
    }
    os << "</svg>\n";
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& res, bool svg) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "heatmap.csv");
        if (!os) throw Error(ErrorKind::Io, "cannot write " + (dir / "heatmap.csv").string());
        write_heatmap_csv(os, res.heatmap);
    }
    for (const auto& c : res.cells) {
        std::ostringstream name;
        name << trainer::to_string(c.mode) << "_d" << c.d << "_n" << c.n << "_s" << c.seed_index << ".jsonl";
        std::ofstream os(dir / name.str());
        if (!os) throw Error(ErrorKind::Io, "cannot write " + (dir / name.str()).string());
        if (c.record) {
            trainer::write_record(os, *c.record);
        } else {
            io::Json j{{"type", "error"}, {"message", c.error}};
            os << io::dump(j) << '\n';
        }
    }
    if (svg) {
        std::vector<std::string> stats;
        for (const auto& r : res.heatmap) {
            if (std::find(stats.begin(), stats.end(), r.stat) == stats.end()) stats.push_back(r.stat);
        }
        for (const auto& stat : stats) {
            std::string file = "heatmap_" + stat + ".svg";
            std::replace(file.begin(), file.end(), ':', '_');
            std::ofstream os(dir / file);
            write_heatmap_svg(os, res.heatmap, stat);
        }
    }
}

}  // namespace reuse::experiments
