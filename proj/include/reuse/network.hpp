#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "reuse/hermite.hpp"
#include "reuse/linalg.hpp"

namespace reuse::network {

using hermite::HermiteSeries;

/// sigma(z) = sum_i beta_i he_i(z) + relu_mix * max(z, 0).
struct ActivationSpec {
    HermiteSeries series;
    double relu_mix = 0.0;

    ActivationSpec() = default;
    ActivationSpec(HermiteSeries s, double relu = 0.0);

    double eval(double z) const;
    /// ReLU subgradient at 0 is 0.
    double deriv(double z) const;
    /// Polynomial part of the derivative, cached.
    const HermiteSeries& derivative_series() const { return d1_; }

private:
    HermiteSeries d1_;
};

double activation_deriv(const ActivationSpec& spec, double z);

enum class ActivationFamily {
    Fixed,              // the same configured series for every neuron
    Relu,               // pure ReLU
    HermiteRademacher,  // beta_i = +-r_i, i.i.d.
    DiscreteMixture,    // two-branch polynomial construction for polynomial links
    GeneralLink,        // (p, p*, I)-indexed construction with a ReLU component
};

ActivationFamily parse_activation_family(const std::string& s);
const char* to_string(ActivationFamily f);

struct ActivationOptions {
    ActivationFamily family = ActivationFamily::DiscreteMixture;
    int q = 1;             // target degree
    int c_q = 0;           // power cap C_q; 0 means "use q"
    double c = 0.05;       // small branch constant
    double r = 0.0;        // Rademacher magnitude; 0 means 1/sqrt(C_sigma + 1)
    double c_relu = 0.0;   // ReLU weight for general_link; 0 means (ln d)^-2
    int d = 2;             // only used for the c_relu default
    int p = 1, p_star = 1, power = 1;  // general_link indices
    HermiteSeries fixed;   // for Fixed
    double fixed_relu = 0.0;
};

/// Smallest odd integer >= max(C_q + 1, q + 2, 3).
int activation_degree(int q, int c_q);

struct SampledActivation {
    ActivationSpec spec;
    int branch = 0;  // 0 or 1 for the two-branch families, else 0
};

/// Draw for neuron `index` from the activation stream of `seed`.
SampledActivation sample_activation(const ActivationOptions& opt, std::uint64_t seed,
                                    std::uint64_t index = 0);

struct NetworkState {
    Matrix W;            // N x d, rows w_j
    Matrix W_prev_even;  // post-normalization weights at the last even step
    Vector a;
    Vector b;
    std::vector<ActivationSpec> activations;
    std::uint64_t step = 0;

    int width() const { return static_cast<int>(W.rows()); }
    int dim() const { return static_cast<int>(W.cols()); }
};

/// Rows uniform on the sphere, a_j = +-c_a, b = 0, W_prev_even = W.
/// Activations are left empty; see assign_activations.
NetworkState init_network(int N, int d, double c_a, std::uint64_t seed);

void assign_activations(NetworkState& state, const ActivationOptions& opt, std::uint64_t seed,
                        std::vector<int>* branches = nullptr);

/// b_j ~ Unif[-C_b, C_b].
void sample_biases(NetworkState& state, double C_b, std::uint64_t seed);

double forward(const NetworkState& state, const double* x);
Vector forward_batch(const NetworkState& state, const Matrix& X);

/// Gradient of (1/B) sum_i (f(x_i) - y_i)^2 with respect to every w_j (N x d).
Matrix squared_loss_gradient(const NetworkState& state, const Matrix& X, const Vector& y);

/// Overlaps <w_j, theta> / ||w_j||.
Vector overlaps(const NetworkState& state, const Vector& theta);

struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::uint64_t samples_consumed = 0;
};

void save_checkpoint(std::ostream& os, const NetworkState& state, const CheckpointMeta& meta);
NetworkState load_checkpoint(std::istream& is, CheckpointMeta* meta = nullptr);

}  // namespace reuse::network
