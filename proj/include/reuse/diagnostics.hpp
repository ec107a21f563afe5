#pragma once

#include <cstdint>
#include <vector>

#include "reuse/linalg.hpp"
#include "reuse/model.hpp"
#include "reuse/network.hpp"

namespace reuse::diagnostics {

/// Terms of the two-step alignment expansion for one sample, starting from a unit w.
struct ExpansionTerms {
    /// psi_i = (eta ||x||^2)^i y^(i+1) sigma'(u)^i sigma^(i+1)(u) <theta, x> / i!,  u = <w, x>.
    std::vector<double> psi;
    double csq = 0.0;  // y sigma'(u) <theta, x>
    /// <theta, w2 - w> for two plain gradient steps w += eta y sigma'(<w, x>) x.
    double realized_unprojected = 0.0;

    /// Same series with x replaced by P x (P = I - w w^T frozen for both steps).
    std::vector<double> psi_projected;
    double csq_projected = 0.0;
    /// <theta, w2 / ||w2||> - <theta, w> for the projected two steps followed by normalization.
    double realized_projected_normalized = 0.0;

    double series_unprojected(double eta) const;
    double series_projected(double eta) const;
};

/// Polynomial part of sigma only.
ExpansionTerms two_step_expansion_terms(const network::ActivationSpec& sigma, const Vector& w, const Vector& theta,
                                        const Vector& x, double y, double eta);

struct GainEstimate {
    /// Monte-Carlo mean with the first-order term as a control variate.
    double mean = 0.0;
    double se = 0.0;
    /// Plain sample mean of the realized gain.
    double raw_mean = 0.0;
    double raw_se = 0.0;
    std::uint64_t count = 0;
    /// Leading small-kappa term of the expected gain (depends on case I / II).
    double analytic_leading = 0.0;
    /// h E[<theta, g>] - kappa h^2 E||g||^2 / 2 with h = eta (1 - xi) and g the
    /// pair-step direction; exact expectations by quadrature. Second order in the
    /// normalization, so only accurate while h^2 E||g||^2 is small.
    double analytic_population = 0.0;
};

/// Expected alignment change of one interpolated, normalized pair step
/// (correlation update, effective rate eta) from a unit weight with overlap
/// kappa. The Monte-Carlo part drives the trainer's own pair-step code.
GainEstimate population_gain(const model::LinkSpec& link, const network::ActivationSpec& sigma, double kappa,
                             double eta, double xi, int d, std::uint64_t n_mc, std::uint64_t seed,
                             double noise_std = 0.0);

/// Leading term h eta^(I-1) E[chi^2_{d-2}^(I-1)] / (I-1)! * sqrt(p*) H(sigma_*^I; p*) H(sigma^(I) sigma'^(I-1); p*-1) kappa^(p*-1)
/// for I >= 2, and h * p* alpha_{p*} beta_{p*} kappa^(p*-1) * 2 for I = 1 (two steps of CSQ drift).
double analytic_leading_term(const model::LinkSpec& link, const network::ActivationSpec& sigma, double kappa,
                             double eta, double xi, int d);

double analytic_population_gain(const model::LinkSpec& link, const network::ActivationSpec& sigma, double kappa,
                                double eta, double xi, int d, double noise_std = 0.0);

/// Fraction of uniform unit vectors in R^d with first coordinate >= 2 C2 / sqrt(d).
double init_tail_fraction(int d, std::uint64_t n_trials, double C2, std::uint64_t seed);

/// a^t = a0 / (1 - c (p-2) a0^(p-2) t)^(1/(p-2)), t = 0..T.
/// This is the solution of a' = c a^(p-1). The recurrence a^{t+1} = a^t + c (a^t)^(p-1)
/// stays below it, by a relative gap of order c a0^(p-2) t * c a0^(p-2), so it is a
/// lower bound only up to that second-order term.
std::vector<double> bihari_lasalle_lower(double a0, double c, int p, std::int64_t T);

/// E[r^k] for r ~ chi^2_m.
double chi2_moment(int m, int k);

}  // namespace reuse::diagnostics
