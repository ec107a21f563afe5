#pragma once

#include "reuse/exponents.hpp"
#include "reuse/model.hpp"
#include "reuse/network.hpp"

namespace reuse::exponents {

/// Weighting of the strong-recovery polynomial s -> sum_j w_j alpha_j beta_j s^(j-1).
/// Normalized: w_j = j (derivative of sum alpha_j beta_j s^j, the population
/// correlation in the orthonormal basis). Factorial: w_j = j!.
enum class StrongWeighting { Normalized, Factorial };

struct ConditionReport {
    bool case_two = false;  // I >= 2
    int power = 1;          // I
    int p_star = 1;

    /// Case I: alpha_{p*} beta_{p*}. Case II: H(sigma_*^I; p*) * H(sigma^(I) (sigma')^(I-1); p* - 1).
    double weak_value = 0.0;
    /// beta_{p*} (case I) or H(sigma^(I) (sigma')^(I-1); p* - 1) (case II).
    double weak_functional = 0.0;
    bool weak_recovery = false;
    bool weak_nonzero = false;  // relaxed convention for xi > 1

    bool strong_recovery = false;
    double strong_min_value = 0.0;  // minimum over the grid

    bool approximation = false;
    bool sign_alignment = false;  // alpha_i beta_i >= 0 for p <= i <= q

    bool all() const { return weak_recovery && strong_recovery && approximation; }
};

ConditionReport check_activation_conditions(const network::ActivationSpec& sigma, const model::LinkSpec& link,
                                            const ReductionCertificate& cert,
                                            StrongWeighting weighting = StrongWeighting::Normalized);

/// Positivity of the strong-recovery polynomial on (0, 10] (10^4-point grid) plus
/// the sign of its leading coefficient. `min_value` receives the grid minimum.
bool strong_recovery_positive(const HermiteSeries& link, const HermiteSeries& sigma, int j0,
                              StrongWeighting weighting, double* min_value = nullptr);

}  // namespace reuse::exponents
