#pragma once

#include <string>
#include <utility>

#include "reuse/hermite.hpp"

namespace reuse::exponents {

using hermite::HermiteSeries;

inline constexpr int kDefaultPowerCap = 12;

/// Outcome of a monomial-transformation search g -> g^power.
struct ReductionCertificate {
    int power = 1;
    int achieved_ie = 0;
    int searched_up_to = 0;
    /// First nonzero Hermite coefficient (index achieved_ie) of (g/||g||)^power.
    double coefficient = 0.0;
};

enum class ReductionMode { EvenTarget2, OddTarget1, GeneralMin };

/// Smallest i > 0 with a nonzero coefficient. Throws ErrorKind::Undefined for
/// the zero series and for constants.
int information_exponent(const HermiteSeries& g);

/// Scans g^1 .. g^i_max (g normalized to unit L2 norm first; each power is
/// renormalized before the zero test). Throws reuse::SearchExhausted when no
/// power qualifies, and propagates ErrorKind::DegreeCap.
ReductionCertificate monomial_reduction(const HermiteSeries& g, ReductionMode mode,
                                        int i_max = kDefaultPowerCap,
                                        int degree_cap = hermite::kDefaultDegreeCap);

/// Largest i with i * deg(g) <= degree_cap.
int max_power_within_cap(const HermiteSeries& g, int degree_cap = hermite::kDefaultDegreeCap);

/// H(sigma^(ell) * (sigma')^(ell-1); k).
double weak_recovery_functional(const HermiteSeries& sigma, int ell, int k,
                                int degree_cap = hermite::kDefaultDegreeCap);

/// (min_{i <= i_max} IE(g^i), argmin). Upper bound on the generative exponent.
/// i_max is clipped so that no power exceeds the degree cap.
std::pair<int, int> generative_exponent_upper(const HermiteSeries& g, int i_max = kDefaultPowerCap);

const char* to_string(ReductionMode mode);
ReductionMode parse_reduction_mode(const std::string& s);

}  // namespace reuse::exponents
