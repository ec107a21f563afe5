#pragma once

#include <string>

#include "reuse/linalg.hpp"
#include "reuse/network.hpp"

namespace reuse::kernels {

enum class Backend { Serial, OpenMP };
enum class LossMode { Squared, Correlation };

LossMode parse_loss_mode(const std::string& s);
const char* to_string(LossMode m);
Backend parse_backend(const std::string& s);
const char* to_string(Backend b);

struct Workspace {
    Matrix z;      // B x N pre-activations
    Matrix coef;   // B x N  r_i * sigma_j'(z_ij)
    Vector f;      // B
    Vector resid;  // B
};

/// One projected SGD step on the batch (X, y):
///   w_j += raw_eta * (2 / (N B)) * a_j * sum_i r_i sigma_j'(<w_j, x_i> + b_j) P_j x_i
/// with r_i = y_i - f(x_i) (squared loss) or r_i = y_i (correlation loss) and
/// P_j = I - p_j p_j^T, p_j the j-th row of `proj`.
///
/// Both backends perform the same floating-point operations in the same
/// order per output entry, so their results are bit-identical.
void sgd_step(network::NetworkState& state, const Matrix& X, const Vector& y, double raw_eta, LossMode loss,
              const Matrix& proj, Backend backend, Workspace& ws);

namespace detail {
void sgd_step_serial(network::NetworkState& state, const Matrix& X, const Vector& y, double raw_eta,
                     LossMode loss, const Matrix& proj, Workspace& ws);
void sgd_step_omp(network::NetworkState& state, const Matrix& X, const Vector& y, double raw_eta,
                  LossMode loss, const Matrix& proj, Workspace& ws);
}  // namespace detail

}  // namespace reuse::kernels
