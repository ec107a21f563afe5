#pragma once

// Reference computations that avoid the library's Hermite algebra: plain
// Gaussian moments E[z^k] = (k-1)!! and power-basis polynomial arithmetic.

#include <vector>

namespace oracle {

using Poly = std::vector<double>;  // power basis, c[k] multiplies z^k

double gaussian_moment(int k);
Poly mul(const Poly& a, const Poly& b);
Poly pow(const Poly& a, int i);
/// Power-basis form of the normalized Hermite polynomial He_n / sqrt(n!),
/// from the explicit sum He_n(z) = n! sum_m (-1)^m z^(n-2m) / (m! (n-2m)! 2^m).
Poly hermite_normalized(int n);
/// E[p(z) q(z)] with z ~ N(0, 1).
double expect_product(const Poly& p, const Poly& q);
/// Coefficient of he_j in p, computed as E[p he_j].
double hermite_coeff(const Poly& p, int j);
/// Polynomial given as a combination of normalized Hermite polynomials.
Poly from_hermite(const std::vector<double>& coeffs);

}  // namespace oracle
