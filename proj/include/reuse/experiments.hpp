#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reuse/model.hpp"
#include "reuse/network.hpp"
#include "reuse/trainer.hpp"

namespace reuse::experiments {

struct ErrorEstimate {
    double mean = 0.0;
    double se = 0.0;
};

/// Monte-Carlo E_x[(f(x) - f_*(x))^2] on fresh noise-free inputs.
ErrorEstimate test_error(const network::NetworkState& st, const model::LinkSpec& link, const Vector& theta,
                         std::uint64_t n_mc, std::uint64_t seed);

enum class Statistic { TopDecile, PerNeuronFirst };
Statistic parse_statistic(const std::string& s);

/// First checkpoint index whose statistic reaches `threshold`.
std::optional<std::size_t> recovery_time(const trainer::RunRecord& rec, double threshold, Statistic stat);

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares of log tau against log d. Needs >= 3 finite positive points.
ScalingFit fit_scaling(const std::map<int, double>& taus);

/// Everything needed for one training run.
struct RunConfig {
    hermite::HermiteSeries link{0.0, 0.0, 0.0, 1.0};
    model::DirectionMode direction = model::DirectionMode::Random;
    int d = 64;
    double noise_std = 0.0;
    int N = 256;
    network::ActivationOptions activation;  // q, d and general_link indices are filled from the link
    trainer::TrainSchedule schedule;
    std::uint64_t seed = 0;
    std::uint64_t test_samples = 20000;
    int power_cap = exponents::kDefaultPowerCap;
    std::vector<double> thresholds{0.5};
};

io::Json to_json(const RunConfig& cfg);

struct RunOutput {
    trainer::RunRecord record;
    network::NetworkState state;         // after Phase II (if run)
    network::NetworkState phase1_state;  // resumable state at the end of Phase I
    std::uint64_t samples_consumed = 0;  // training stream position
};

/// Continue from a saved state instead of initializing.
struct Resume {
    network::NetworkState state;
    std::uint64_t samples_consumed = 0;
};

RunOutput run_single(const RunConfig& cfg, const Resume* resume = nullptr);

struct SweepGrid {
    std::vector<int> d_values{64};
    std::vector<std::int64_t> n_values{1024};
    std::vector<trainer::TrainMode> modes{trainer::TrainMode::PairedReuse};
    int seeds = 1;
    double strong_fraction = 0.0;  // share of paired-mode pair steps spent in the strong phase
    RunConfig base;                // d and the sample budget are substituted per cell
};

/// The run configuration of one cell. Seed index s uses seed base.seed + s.
RunConfig cell_config(const SweepGrid& grid, int d, std::int64_t n, trainer::TrainMode mode, int s);

struct CellResult {
    int d = 0;
    std::int64_t n = 0;
    trainer::TrainMode mode{};
    int seed_index = 0;
    std::optional<trainer::RunRecord> record;
    std::string error;
};

struct HeatmapRow {
    int d = 0;
    std::int64_t n = 0;
    std::string stat;
    double mean = 0.0;
    double std = 0.0;
    int count = 0;
};

struct SweepResult {
    std::vector<CellResult> cells;
    std::vector<HeatmapRow> heatmap;
};

/// Runs every cell (bounded worker pool of `parallelism` threads, results kept
/// in cell order) and aggregates final top-decile / mean |overlap| and test error.
SweepResult run_sweep(const SweepGrid& grid, int parallelism);

void write_heatmap_csv(std::ostream& os, const std::vector<HeatmapRow>& rows);
/// Simple linear-scale heatmap of one statistic.
void write_heatmap_svg(std::ostream& os, const std::vector<HeatmapRow>& rows, const std::string& stat);

/// Writes heatmap.csv, one <mode>_d<d>_n<n>_s<k>.jsonl per cell and heatmap_<mode>.svg.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& res, bool svg);

}  // namespace reuse::experiments
