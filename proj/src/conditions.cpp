#include "reuse/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace reuse::exponents {

namespace {

constexpr int kGridPoints = 10000;
constexpr double kGridMax = 10.0;

double weight(int j, StrongWeighting w) {
    return w == StrongWeighting::Normalized ? j : std::tgamma(j + 1.0);
}

}  // namespace

bool strong_recovery_positive(const HermiteSeries& link, const HermiteSeries& sigma, int j0,
                              StrongWeighting weighting, double* min_value) {
    const int q = link.degree();
    // coefficient of s^(j-1)
    std::vector<double> c;
    const double tol = link.zero_tolerance() * std::max(1.0, sigma.norm());
    for (int j = std::max(j0, 1); j <= q; ++j) {
        const double v = weight(j, weighting) * link[j] * sigma[j];
        c.resize(j, 0.0);
        c[j - 1] = std::abs(v) > tol ? v : 0.0;
    }
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.empty()) {
        if (min_value) *min_value = 0.0;
        return false;
    }
    double lo = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= kGridPoints; ++k) {
        const double s = kGridMax * k / kGridPoints;
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
        lo = std::min(lo, v);
    }
    if (min_value) *min_value = lo;
    return lo > 0.0 && c.back() > 0.0;
}

ConditionReport check_activation_conditions(const network::ActivationSpec& sigma, const model::LinkSpec& link,
                                            const ReductionCertificate& cert, StrongWeighting weighting) {
    ConditionReport r;
    r.power = cert.power;
    r.p_star = cert.achieved_ie;
    r.case_two = cert.power >= 2;
    const HermiteSeries& alpha = link.series;
    const HermiteSeries& beta = sigma.series;
    const int ps = r.p_star;

    if (!r.case_two) {
        r.weak_functional = beta[ps];
        r.weak_value = alpha[ps] * beta[ps];
    } else {
        const HermiteSeries unit_power = hermite::power(alpha.normalized(), cert.power);
        const double h_link = hermite::hermite_coeff(unit_power, ps);
        r.weak_functional = weak_recovery_functional(beta, cert.power, ps - 1);
        r.weak_value = h_link * r.weak_functional;
    }
    const double scale = std::max(1.0, beta.norm()) * std::max(1.0, alpha.norm());
    r.weak_nonzero = std::abs(r.weak_value) > hermite::kZeroRelTol * scale;
    r.weak_recovery = r.weak_nonzero && r.weak_value > 0.0;

    const int j0 = r.case_two ? ps + 1 : ps;
    r.strong_recovery = strong_recovery_positive(alpha, beta, j0, weighting, &r.strong_min_value);

    const int q = link.degree;
    for (int i = q; i <= beta.degree(); ++i) {
        if (!beta.is_zero_coeff(i)) r.approximation = true;
    }
    if (sigma.relu_mix > 0.0) r.approximation = true;

    r.sign_alignment = true;
    for (int i = link.info_exponent; i <= q; ++i) {
        if (alpha[i] * beta[i] < 0.0) r.sign_alignment = false;
    }
    return r;
}

}  // namespace reuse::exponents
