// Command-line front end: exponent, activation-check, train, baseline, sweep, diagnose.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "reuse/conditions.hpp"
#include "reuse/config.hpp"
#include "reuse/diagnostics.hpp"
#include "reuse/error.hpp"
#include "reuse/experiments.hpp"
#include "reuse/io.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace reuse;
using io::Json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int parallelism = 1;
    std::string mode;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c, bool with_mode) {
    app->add_option("--config", c.config, "Config file (JSON sections or 'section.key = value' lines)");
    app->add_option("--out", c.out, "Output directory")->capture_default_str();
    app->add_option("--seed", c.seed, "Override run.seed");
    app->add_option("--parallelism", c.parallelism, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--set", c.sets, "Extra 'section.key=value' override (repeatable)");
    if (with_mode) {
        app->add_option("--mode", c.mode, "Training mode")->check(CLI::IsMember({"paired", "online", "full-batch"}));
    }
}

// defaults < config file < environment < flags
config::Settings resolve(const Common& c) {
    config::Settings s;
    if (!c.config.empty()) config::load_file(s, c.config);
    config::apply_env(s, environ);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Usage, "--set expects section.key=value, got '" + kv + "'");
        config::apply_value(s, kv.substr(0, eq), Json(kv.substr(eq + 1)));
    }
    if (c.seed) s.run().seed = *c.seed;
    if (!c.mode.empty()) s.run().schedule.mode = trainer::parse_train_mode(c.mode);
    if (c.parallelism > 1) s.run().schedule.backend = kernels::Backend::OpenMP;
    return s;
}

void write_manifest(const fs::path& dir, const std::string& sub, const Json& resolved, const Json& seeds,
                    const std::vector<std::string>& outputs) {
    fs::create_directories(dir);
    Json m;
    m["tool"] = "reuse-sgd";
    m["version"] = kVersion;
    m["subcommand"] = sub;
    m["config"] = resolved;
    m["config_hash"] = io::fnv1a_hex(io::dump(resolved));
    m["seeds"] = seeds;
    m["versions"] = {{"reuse-sgd", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__}};
    m["outputs"] = outputs;
    io::write_json_file(dir / "manifest.json", m);
}

hermite::HermiteSeries parse_link(const std::string& herm, const std::string& mono) {
    if (!herm.empty() && !mono.empty()) throw Error(ErrorKind::Usage, "give either --hermite or --monomial, not both");
    if (!mono.empty()) {
        const auto c = config::parse_number_list(mono);
        return hermite::from_monomial(std::span<const double>(c.data(), c.size()));
    }
    return hermite::HermiteSeries(config::parse_number_list(herm));
}

int cmd_exponent(const Common& c, const std::string& herm, const std::string& mono, const std::string& rmode,
                 int i_max) {
    config::Settings s = resolve(c);
    hermite::HermiteSeries g = (herm.empty() && mono.empty()) ? s.run().link : parse_link(herm, mono);
    const int ie = exponents::information_exponent(g);
    const auto [ge, ge_power] = exponents::generative_exponent_upper(g, i_max);
    Json rep;
    rep["hermite"] = g.coeffs();
    rep["information_exponent"] = ie;
    rep["generative_exponent_upper"] = ge;
    rep["generative_exponent_power"] = ge_power;
    std::cout << "IE=" << ie << "\nGE-upper=" << ge << " (power " << ge_power << ")\n";
    const auto mode = exponents::parse_reduction_mode(rmode);
    try {
        const auto cert = exponents::monomial_reduction(g, mode, i_max);
        rep["certificate"] = {{"mode", rmode},
                              {"power", cert.power},
                              {"achieved_ie", cert.achieved_ie},
                              {"searched_up_to", cert.searched_up_to},
                              {"coefficient", cert.coefficient}};
        std::cout << "certificate[" << rmode << "]: power " << cert.power << ", IE " << cert.achieved_ie
                  << ", coefficient " << io::format_double(cert.coefficient) << "\n";
    } catch (const SearchExhausted& e) {
        rep["certificate"] = {{"mode", rmode}, {"error", e.what()}, {"best_ie", e.best_ie()}, {"best_power", e.best_power()}};
        std::cout << "certificate[" << rmode << "]: " << e.what() << "\n";
    }
    fs::create_directories(c.out);
    io::write_json_file(fs::path(c.out) / "exponent.json", rep);
    Json resolved = config::resolved_json(s);
    resolved["exponent"] = {{"hermite", g.coeffs()}, {"reduction", rmode}, {"i_max", i_max}};
    write_manifest(c.out, "exponent", resolved, Json::object(), {"exponent.json"});
    return 0;
}

int cmd_activation_check(const Common& c, int draws) {
    config::Settings s = resolve(c);
    const auto& r = s.run();
    const auto link = model::LinkSpec::make(r.link, true, r.power_cap);
    network::ActivationOptions opt = r.activation;
    opt.q = link.degree;
    opt.d = r.d;
    opt.p = link.info_exponent;
    opt.p_star = link.p_star();
    opt.power = link.power();
    if (opt.family == network::ActivationFamily::Fixed && opt.fixed.is_zero()) opt.fixed = link.series;
    int weak = 0, strong = 0, approx = 0, all = 0, align = 0;
    for (int k = 0; k < draws; ++k) {
        const auto a = network::sample_activation(opt, r.seed, static_cast<std::uint64_t>(k));
        const auto rep = exponents::check_activation_conditions(a.spec, link, *link.reduction);
        weak += rep.weak_recovery;
        strong += rep.strong_recovery;
        approx += rep.approximation;
        all += rep.all();
        align += rep.sign_alignment;
    }
    const auto frac = [&](int k) { return static_cast<double>(k) / draws; };
    Json rep;
    rep["draws"] = draws;
    rep["case"] = link.power() >= 2 ? "II" : "I";
    rep["power"] = link.power();
    rep["p_star"] = link.p_star();
    rep["pass_rate"] = {{"weak_recovery", frac(weak)},
                        {"strong_recovery", frac(strong)},
                        {"approximation", frac(approx)},
                        {"all", frac(all)},
                        {"sign_alignment", frac(align)}};
    std::cout << "case " << (link.power() >= 2 ? "II" : "I") << " (I=" << link.power() << ", p*=" << link.p_star()
              << "), " << draws << " draws of " << network::to_string(opt.family) << "\n"
              << "  weak recovery   " << frac(weak) << "\n"
              << "  strong recovery " << frac(strong) << "\n"
              << "  approximation   " << frac(approx) << "\n"
              << "  all             " << frac(all) << "\n"
              << "  sign alignment  " << frac(align) << "\n";
    fs::create_directories(c.out);
    io::write_json_file(fs::path(c.out) / "activation_check.json", rep);
    Json resolved = config::resolved_json(s);
    resolved["activation_check"] = {{"draws", draws}};
    write_manifest(c.out, "activation-check", resolved, {{"run", r.seed}}, {"activation_check.json"});
    return 0;
}

int cmd_train(const Common& c, const std::string& sub, const std::string& resume_path, int export_rows) {
    config::Settings s = resolve(c);
    if (sub == "baseline" && c.mode.empty() && s.run().schedule.mode == trainer::TrainMode::PairedReuse) {
        s.run().schedule.mode = trainer::TrainMode::Online;
    }
    if (sub == "baseline" && s.run().schedule.mode == trainer::TrainMode::PairedReuse) {
        throw Error(ErrorKind::Usage, "baseline runs online or full-batch mode");
    }
    std::optional<experiments::Resume> resume;
    if (!resume_path.empty()) {
        std::ifstream is(resume_path);
        if (!is) throw Error(ErrorKind::Usage, "cannot open checkpoint " + resume_path);
        network::CheckpointMeta meta;
        resume.emplace();
        resume->state = network::load_checkpoint(is, &meta);
        resume->samples_consumed = meta.samples_consumed;
    }
    const auto out = experiments::run_single(s.run(), resume ? &*resume : nullptr);
    const fs::path dir = c.out;
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "record.jsonl");
        trainer::write_record(os, out.record);
    }
    {
        std::ofstream os(dir / "checkpoint.json");
        network::save_checkpoint(os, out.phase1_state, {s.run().seed, out.samples_consumed});
    }
    {
        std::ofstream os(dir / "final_state.json");
        network::save_checkpoint(os, out.state, {s.run().seed, out.samples_consumed});
    }
    std::vector<std::string> outputs{"record.jsonl", "checkpoint.json", "final_state.json"};
    if (export_rows > 0) {
        // The first rows of the training stream, as consumed by the run.
        const auto& r = s.run();
        const auto link = model::LinkSpec::make(r.link, false);
        const auto batch = model::sample_batch(link, model::make_direction(r.d, r.direction, r.seed), export_rows,
                                               {r.d, r.noise_std, r.seed});
        std::ofstream os(dir / "batch.csv");
        model::write_batch_csv(os, batch);
        outputs.emplace_back("batch.csv");
    }
    Json resolved = config::resolved_json(s);
    resolved["resolved"] = out.record.config["resolved"];
    if (!resume_path.empty()) resolved["resume"] = resume_path;
    write_manifest(dir, sub, resolved, {{"run", s.run().seed}}, outputs);

    const auto& last = out.record.checkpoints.back();
    std::cout << trainer::to_string(s.run().schedule.mode) << " run, d=" << s.run().d << ", N=" << s.run().N
              << ", seed " << s.run().seed << "\n"
              << "  checkpoints       " << out.record.checkpoints.size() << "\n"
              << "  samples consumed  " << last.samples << "\n"
              << "  top-decile |k|    " << io::format_double(last.top_decile) << "\n"
              << "  mean |k|          " << io::format_double(last.mean_abs) << "\n";
    if (out.record.test_error) {
        std::cout << "  test error        " << io::format_double(*out.record.test_error) << " +- "
                  << io::format_double(*out.record.test_error_se) << "\n";
    }
    for (const auto& [k, v] : out.record.recovery_samples) {
        std::cout << "  recovery " << k << "  " << (v ? std::to_string(*v) : std::string("none")) << "\n";
    }
    return 0;
}

int cmd_sweep(const Common& c) {
    config::Settings s = resolve(c);
    const auto res = experiments::run_sweep(s.sweep, c.parallelism);
    experiments::write_sweep_outputs(c.out, res, s.svg);
    std::vector<std::string> outputs{"heatmap.csv"};
    Json seeds = Json::array();
    int failed = 0;
    for (const auto& cell : res.cells) {
        seeds.push_back(s.run().seed + static_cast<std::uint64_t>(cell.seed_index));
        if (!cell.record) ++failed;
    }
    Json resolved = config::resolved_json(s);
    write_manifest(c.out, "sweep", resolved, {{"base", s.run().seed}, {"cells", seeds}}, outputs);
    experiments::write_heatmap_csv(std::cout, res.heatmap);
    if (failed) std::cerr << failed << " cell(s) failed; see the per-cell records\n";
    return 0;
}

struct DiagnoseOpts {
    std::string report = "init-tail";
    double kappa = 0.1;
    double eta = -1;       // effective rate; <0 means eta_weak / d
    double xi = -1;        // <0 means the weak-phase default
    std::uint64_t n_mc = 200000;
    double C2 = 0.5;
    std::uint64_t trials = 100000;
    int instances = 1000;
};

int cmd_diagnose(const Common& c, const DiagnoseOpts& o) {
    config::Settings s = resolve(c);
    const auto& r = s.run();
    const auto link = model::LinkSpec::make(r.link, true, r.power_cap);
    network::ActivationOptions opt = r.activation;
    opt.q = link.degree;
    opt.d = r.d;
    opt.p = link.info_exponent;
    opt.p_star = link.p_star();
    opt.power = link.power();
    if (opt.family == network::ActivationFamily::Fixed && opt.fixed.is_zero()) opt.fixed = link.series;
    const double eta = o.eta > 0 ? o.eta : r.schedule.eta_phase1_weak / r.d;
    const double xi = o.xi >= 0 ? o.xi : trainer::weak_xi(r.schedule, r.d, link.p_star());
    Json rep;
    rep["report"] = o.report;
    if (o.report == "init-tail") {
        const double f = diagnostics::init_tail_fraction(r.d, o.trials, o.C2, r.seed);
        const double bound = std::exp(-16.0 * o.C2 * o.C2);
        rep["d"] = r.d;
        rep["C2"] = o.C2;
        rep["trials"] = o.trials;
        rep["fraction"] = f;
        rep["lower_bound"] = bound;
        std::cout << "P[kappa0 >= 2 C2 / sqrt(d)] = " << io::format_double(f) << " (bound e^{-16 C2^2} = "
                  << io::format_double(bound) << ")\n";
    } else if (o.report == "population-gain") {
        const auto sigma = network::sample_activation(opt, r.seed, 0).spec;
        const auto g = diagnostics::population_gain(link, sigma, o.kappa, eta, xi, r.d, o.n_mc, r.seed, r.noise_std);
        rep["kappa"] = o.kappa;
        rep["eta"] = eta;
        rep["xi"] = xi;
        rep["activation"] = sigma.series.coeffs();
        rep["mean"] = g.mean;
        rep["se"] = g.se;
        rep["count"] = g.count;
        rep["analytic_leading"] = g.analytic_leading;
        rep["analytic_population"] = g.analytic_population;
        std::cout << "pair-step gain " << io::format_double(g.mean) << " +- " << io::format_double(g.se)
                  << "\n  analytic (population) " << io::format_double(g.analytic_population)
                  << "\n  analytic (leading)    " << io::format_double(g.analytic_leading) << "\n";
    } else if (o.report == "expansion") {
        const auto sigma = network::sample_activation(opt, r.seed, 0).spec;
        const Vector theta = model::make_direction(r.d, model::DirectionMode::Axis, r.seed);
        const model::DataConfig dc{r.d, r.noise_std, r.seed};
        const auto batch = model::sample_batch(link, theta, o.instances, dc, 0, StreamPurpose::MonteCarlo);
        Stream ws(r.seed, StreamPurpose::MonteCarlo, 7);
        double worst = 0.0;
        Json rows = Json::array();
        for (int i = 0; i < o.instances; ++i) {
            Vector w(r.d);
            for (int k = 0; k < r.d; ++k) w[k] = ws.normal();
            w /= w.norm();
            const Vector x = batch.x.row(i).transpose();
            const auto t = diagnostics::two_step_expansion_terms(sigma, w, theta, x, batch.y[i], eta);
            const double err = std::abs(t.realized_unprojected - t.series_unprojected(eta)) /
                               std::max(std::abs(t.realized_unprojected), 1e-300);
            worst = std::max(worst, err);
            if (i < 5) {
                rows.push_back({{"csq", t.csq}, {"psi", t.psi}, {"realized", t.realized_unprojected}});
            }
        }
        rep["instances"] = o.instances;
        rep["eta"] = eta;
        rep["max_relative_error"] = worst;
        rep["examples"] = rows;
        std::cout << "two-step expansion over " << o.instances << " instances: max relative error "
                  << io::format_double(worst) << "\n";
    } else {
        throw Error(ErrorKind::Usage, "unknown report '" + o.report + "'");
    }
    fs::create_directories(c.out);
    io::write_json_file(fs::path(c.out) / "diagnose.json", rep);
    Json resolved = config::resolved_json(s);
    resolved["diagnose"] = {{"report", o.report}, {"kappa", o.kappa}, {"eta", eta}, {"xi", xi},
                            {"n_mc", o.n_mc}, {"C2", o.C2}, {"trials", o.trials}, {"instances", o.instances}};
    write_manifest(c.out, "diagnose", resolved, {{"run", r.seed}}, {"diagnose.json"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch-reuse SGD for Gaussian single-index models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    std::string herm, mono, rmode = "general_min", resume;
    int i_max = exponents::kDefaultPowerCap;
    int draws = 10000;
    int export_rows = 0;
    DiagnoseOpts dopt;

    auto* ex = app.add_subcommand("exponent", "Information exponent, generative-exponent upper bound, reduction certificate");
    add_common(ex, common, false);
    ex->add_option("--hermite", herm, "Hermite coefficients, e.g. 0,0,0,1");
    ex->add_option("--monomial", mono, "Power-basis coefficients, e.g. 0,-3,0,1");
    ex->add_option("--reduction", rmode, "Reduction mode")->check(CLI::IsMember({"general_min", "even_target_2", "odd_target_1"}));
    ex->add_option("--i-max", i_max, "Largest power searched")->check(CLI::PositiveNumber);

    auto* ac = app.add_subcommand("activation-check", "Sample activations and report condition pass rates");
    add_common(ac, common, false);
    ac->add_option("--draws", draws, "Number of sampled activations")->check(CLI::PositiveNumber);

    auto* tr = app.add_subcommand("train", "Single run in any mode");
    add_common(tr, common, true);
    tr->add_option("--resume", resume, "Continue from a checkpoint JSON");
    tr->add_option("--export-batch", export_rows, "Also write the first N training rows to batch.csv");

    auto* bl = app.add_subcommand("baseline", "Online or full-batch baseline run");
    add_common(bl, common, true);
    bl->add_option("--resume", resume, "Continue from a checkpoint JSON");
    bl->add_option("--export-batch", export_rows, "Also write the first N training rows to batch.csv");

    auto* sw = app.add_subcommand("sweep", "Grid over (d, n, mode, seed)");
    add_common(sw, common, false);

    auto* dg = app.add_subcommand("diagnose", "Expansion, population-gain and initialization reports");
    add_common(dg, common, false);
    dg->add_option("--report", dopt.report, "Report kind")->check(CLI::IsMember({"expansion", "population-gain", "init-tail"}));
    dg->add_option("--kappa", dopt.kappa, "Overlap for population-gain");
    dg->add_option("--eta", dopt.eta, "Effective rate (default eta_weak / d)");
    dg->add_option("--xi", dopt.xi, "Interpolation parameter (default: weak-phase xi)");
    dg->add_option("--n-mc", dopt.n_mc, "Monte-Carlo samples");
    dg->add_option("--C2", dopt.C2, "Threshold constant for init-tail");
    dg->add_option("--trials", dopt.trials, "Trials for init-tail");
    dg->add_option("--instances", dopt.instances, "Instances for expansion");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*ex) return cmd_exponent(common, herm, mono, rmode, i_max);
        if (*ac) return cmd_activation_check(common, draws);
        if (*tr) return cmd_train(common, "train", resume, export_rows);
        if (*bl) return cmd_train(common, "baseline", resume, export_rows);
        if (*sw) return cmd_sweep(common);
        if (*dg) return cmd_diagnose(common, dopt);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (e.kind() == ErrorKind::Usage) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
