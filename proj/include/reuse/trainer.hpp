#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reuse/io.hpp"
#include "reuse/kernels.hpp"
#include "reuse/model.hpp"
#include "reuse/network.hpp"

namespace reuse::trainer {

using kernels::Backend;
using kernels::LossMode;

enum class TrainMode { PairedReuse, Online, FullBatch };

TrainMode parse_train_mode(const std::string& s);
const char* to_string(TrainMode m);

/// Hyperparameters of Phase I / II. Rates are effective per-neuron rates
/// eta = c_eta / d; the raw rate applied to the squared loss is eta * N / (2 c_a).
/// Non-positive values of c_xi, c_a, C_b and negative lambda select the defaults
/// documented on the resolving functions below.
struct TrainSchedule {
    TrainMode mode = TrainMode::PairedReuse;
    double eta_phase1_weak = 1.0;    // c_eta
    double eta_phase1_strong = 1.0;
    double xi_weak = 0.0;            // c_xi; 0 means 0.1 / ln d
    double xi_strong = 0.0;
    bool strong_phase_odd_step_eta_zero = true;
    std::int64_t T11 = 0;            // weak-phase pair steps
    std::int64_t T12 = 0;            // strong-phase pair steps
    std::int64_t T2 = 0;             // ridge samples
    double lambda = -1.0;            // < 0 means probe-based default
    int batch_size = 1;
    LossMode loss = LossMode::Squared;
    double c_a = 0.0;                // 0 means d^{-(p*-1)/2}
    double C_b = 0.0;                // 0 means 4 sqrt(ln d)
    std::int64_t steps = 0;          // online / full-batch step count
    std::int64_t full_batch_n = 0;   // full-batch sample count
    int max_checkpoints = 512;
    Backend backend = Backend::Serial;
};

double resolve_c_xi(const TrainSchedule& s, int d);
/// xi = 1 - c_xi d^{-(p*-2)_+/2}.
double weak_xi(const TrainSchedule& s, int d, int p_star);
double resolve_c_a(const TrainSchedule& s, int d, int p_star);
double resolve_C_b(const TrainSchedule& s, int d);
double raw_rate(double c_eta, int d, int N, double c_a);

struct Checkpoint {
    std::int64_t step = 0;       // SGD steps taken
    std::int64_t samples = 0;    // distinct training samples consumed
    std::string phase;           // "init", "weak", "strong", "online", "full_batch"
    Vector kappa;                // normalized overlaps
    double top_decile = 0.0;     // mean of the largest ceil(N/10) |kappa_j|
    double mean_abs = 0.0;
};

double top_decile_mean(const Vector& kappa);
Checkpoint make_checkpoint(const network::NetworkState& st, const Vector& theta, std::int64_t samples,
                           const std::string& phase);

struct RunRecord {
    io::Json config;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<Checkpoint> checkpoints;
    std::optional<double> test_error;
    std::optional<double> test_error_se;
    std::optional<double> lambda;
    std::map<std::string, std::optional<std::int64_t>> recovery_samples;
    double wall_clock_s = 0.0;
};

/// One JSON object per line: a "run" header, one "checkpoint" line per
/// checkpoint, and a closing "summary".
void write_record(std::ostream& os, const RunRecord& rec);
RunRecord read_record(std::istream& is);

// ---- Phase I building blocks ------------------------------------------------

/// Interpolation toward W_prev_even (skipped at step 0), row normalization and
/// snapshot into W_prev_even. Throws ErrorKind::Numeric on a zero row.
void begin_pair(network::NetworkState& st, double xi);

/// The two SGD steps of a pair on the same batch, both projected with the
/// frozen W_prev_even. raw_eta_odd == 0 skips the second step.
void pair_sgd(network::NetworkState& st, const model::Batch& batch, double raw_eta_even, double raw_eta_odd,
              LossMode loss, Backend backend, kernels::Workspace& ws);

/// begin_pair followed by pair_sgd.
void phase1_pair_step(network::NetworkState& st, const model::Batch& batch, double raw_eta, double xi,
                      LossMode loss, Backend backend, kernels::Workspace& ws);

struct PhaseContext {
    model::DataSource* data;
    const Vector* theta;
    int p_star = 1;
};

/// Weak phase (T11 pairs, paired reuse with xi_weak) then strong phase (T12
/// pairs, eta_odd = 0 and xi_strong by default); ends with a final
/// interpolation + normalization so every row is unit-norm.
void run_phase1(network::NetworkState& st, const TrainSchedule& s, PhaseContext ctx, RunRecord& rec);
/// Fresh batch every step, projection at the current weights, normalization every step.
void run_online_baseline(network::NetworkState& st, const TrainSchedule& s, PhaseContext ctx, RunRecord& rec);
/// One fixed batch of full_batch_n samples reused for every step.
void run_full_batch(network::NetworkState& st, const TrainSchedule& s, PhaseContext ctx, RunRecord& rec);

// ---- Phase II -----------------------------------------------------------------

struct RidgeResult {
    Vector a;
    double lambda = 0.0;
    double stationarity = 0.0;  // ||Psi^T (Psi a / N - y) / (N T2) + lambda a||
    double train_mse = 0.0;
};

/// psi_ij = sigma_j(<w_j, x_i> + b_j).
Matrix feature_matrix(const network::NetworkState& st, const Matrix& X);

/// Exact minimizer of (1/T2) ||Psi a / N - y||^2 + lambda ||a||^2 by a Cholesky
/// solve of the normal equations. Throws ErrorKind::Numeric if the system is not
/// positive definite.
RidgeResult ridge_solve(const Matrix& Psi, const Vector& y, double lambda);

/// sqrt(E||psi||^4 / T2) / N^2, moment estimated on `probe` samples.
double default_lambda(const network::NetworkState& st, const model::Batch& probe, std::int64_t T2);

/// Samples biases, draws T2 fresh samples from `data`, solves the ridge
/// problem and writes the result into st.a. lambda < 0 uses default_lambda on a
/// 1024-sample probe from the probe stream.
RidgeResult phase2_ridge(network::NetworkState& st, model::DataSource& data, std::int64_t T2, double lambda,
                         double C_b, std::uint64_t seed);

}  // namespace reuse::trainer
