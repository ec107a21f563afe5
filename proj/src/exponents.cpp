#include "reuse/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "reuse/error.hpp"

namespace reuse::exponents {

int information_exponent(const HermiteSeries& g) {
    if (g.is_zero()) throw Error(ErrorKind::Undefined, "information exponent undefined for the zero series");
    const double tol = g.zero_tolerance();
    for (int i = 1; i <= g.degree(); ++i) {
        if (std::abs(g[i]) > tol) return i;
    }
    throw Error(ErrorKind::Undefined, "information exponent undefined for a constant series");
}

namespace {

struct Candidate {
    int power;
    int ie;
    double coefficient;
};

Candidate evaluate_power(const HermiteSeries& unit, int i, int degree_cap) {
    const HermiteSeries gi = hermite::power(unit, i, degree_cap);
    const int ie = information_exponent(gi.normalized());
    return {i, ie, gi[ie]};
}

}  // namespace

ReductionCertificate monomial_reduction(const HermiteSeries& g, ReductionMode mode, int i_max, int degree_cap) {
    if (i_max < 1) throw Error(ErrorKind::Domain, "i_max must be >= 1");
    const HermiteSeries unit = g.normalized();
    information_exponent(unit);  // rejects constants up front

    // Every power of an even series is even, so IE 2 is already optimal.
    const bool even = unit.odd_part().norm() <= unit.zero_tolerance();
    Candidate best{0, std::numeric_limits<int>::max(), 0.0};
    for (int i = 1; i <= i_max; ++i) {
        const Candidate c = evaluate_power(unit, i, degree_cap);
        if (c.ie < best.ie) best = c;
        const bool hit = (mode == ReductionMode::EvenTarget2 && c.ie <= 2) ||
                         (mode == ReductionMode::OddTarget1 && c.ie == 1);
        if (hit) return {c.power, c.ie, i_max, c.coefficient};
        // IE = 1 cannot be beaten.
        if (mode == ReductionMode::GeneralMin && (c.ie == 1 || (even && c.ie == 2))) break;
    }
    if (mode == ReductionMode::GeneralMin) return {best.power, best.ie, i_max, best.coefficient};
    throw SearchExhausted(std::string("monomial search (") + to_string(mode) + ") exhausted at i_max = " +
                              std::to_string(i_max) + "; best IE " + std::to_string(best.ie) + " at power " +
                              std::to_string(best.power),
                          best.ie, best.power);
}

int max_power_within_cap(const HermiteSeries& g, int degree_cap) {
    return std::max(1, degree_cap / std::max(1, g.degree()));
}

double weak_recovery_functional(const HermiteSeries& sigma, int ell, int k, int degree_cap) {
    if (ell < 1) throw Error(ErrorKind::Domain, "weak_recovery_functional needs ell >= 1");
    const HermiteSeries d1 = hermite::derivative(sigma);
    const HermiteSeries dl = hermite::derivative(sigma, ell);
    const HermiteSeries prod = hermite::multiply(dl, hermite::power(d1, ell - 1, degree_cap), degree_cap);
    return hermite::hermite_coeff(prod, k);
}

std::pair<int, int> generative_exponent_upper(const HermiteSeries& g, int i_max) {
    i_max = std::min(i_max, max_power_within_cap(g));
    const auto cert = monomial_reduction(g, ReductionMode::GeneralMin, i_max);
    return {cert.achieved_ie, cert.power};
}

const char* to_string(ReductionMode mode) {
    switch (mode) {
        case ReductionMode::EvenTarget2: return "even_target_2";
        case ReductionMode::OddTarget1: return "odd_target_1";
        case ReductionMode::GeneralMin: return "general_min";
    }
    return "?";
}

ReductionMode parse_reduction_mode(const std::string& s) {
    if (s == "even_target_2") return ReductionMode::EvenTarget2;
    if (s == "odd_target_1") return ReductionMode::OddTarget1;
    if (s == "general_min") return ReductionMode::GeneralMin;
    throw Error(ErrorKind::Config, "unknown reduction mode '" + s + "'");
}

}  // namespace reuse::exponents
