#pragma once

#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace reuse::hermite {

inline constexpr int kDefaultDegreeCap = 64;
inline constexpr int kMaxQuadratureNodes = 200;
inline constexpr double kZeroRelTol = 1e-10;

/// Finite expansion in the orthonormal probabilists' Hermite basis
/// he_i = He_i / sqrt(i!), so that E[he_i(z) he_j(z)] = delta_ij for z ~ N(0,1).
///
/// Trailing exact zeros are trimmed on construction; the zero series has an
/// empty coefficient list and degree() == -1.
class HermiteSeries {
public:
    HermiteSeries() = default;
    explicit HermiteSeries(std::vector<double> coeffs);
    HermiteSeries(std::initializer_list<double> coeffs)
        : HermiteSeries(std::vector<double>(coeffs)) {}

    static HermiteSeries basis(int k, double scale = 1.0);

    const std::vector<double>& coeffs() const { return coeffs_; }
    double operator[](int i) const {
        return (i >= 0 && i < static_cast<int>(coeffs_.size())) ? coeffs_[i] : 0.0;
    }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }

    /// L2(gamma) norm; equals the Euclidean norm of the coefficients.
    double norm() const;
    /// |c| <= kZeroRelTol * max(1, ||g||) counts as zero.
    double zero_tolerance() const;
    bool is_zero_coeff(int i) const;

    HermiteSeries normalized() const;
    HermiteSeries even_part() const;
    HermiteSeries odd_part() const;

    friend HermiteSeries operator+(const HermiteSeries& a, const HermiteSeries& b);
    friend HermiteSeries operator-(const HermiteSeries& a, const HermiteSeries& b);
    friend HermiteSeries operator*(double s, const HermiteSeries& a);
    friend HermiteSeries operator-(const HermiteSeries& a) { return -1.0 * a; }
    friend bool operator==(const HermiteSeries&, const HermiteSeries&) = default;

private:
    std::vector<double> coeffs_;
};

/// Value of he_0..he_n at z via the normalized three-term recurrence.
void basis_values(double z, std::span<double> out);

double eval(const HermiteSeries& s, double z);

/// Power-basis coefficients c_k of z^k  ->  normalized Hermite series.
HermiteSeries from_monomial(std::span<const double> power_coeffs);
inline HermiteSeries from_monomial(std::initializer_list<double> c) {
    return from_monomial(std::span<const double>(c.begin(), c.size()));
}
std::vector<double> to_monomial(const HermiteSeries& s);

/// Exact product through the normalized linearization coefficients.
/// Throws ErrorKind::DegreeCap when deg(a) + deg(b) exceeds `degree_cap`.
HermiteSeries multiply(const HermiteSeries& a, const HermiteSeries& b,
                       int degree_cap = kDefaultDegreeCap);
HermiteSeries power(const HermiteSeries& a, int i, int degree_cap = kDefaultDegreeCap);

/// c * he_j -> c * sqrt(j) * he_{j-1}.
HermiteSeries derivative(const HermiteSeries& a);
HermiteSeries derivative(const HermiteSeries& a, int order);

/// H(g; j) = E[g(z) he_j(z)].
double hermite_coeff(const HermiteSeries& g, int j);
/// Quadrature route; `degree_hint` (polynomial degree of g) is mandatory.
double hermite_coeff(const std::function<double(double)>& g, int j, std::optional<int> degree_hint);

/// Gauss-Hermite rule for the standard normal measure (weights sum to 1).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached n-point rule, 1 <= n <= kMaxQuadratureNodes.
const QuadratureRule& gauss_hermite_rule(int n);
/// Node count making the rule exact for polynomials of the given degree.
int nodes_for_degree(int degree);

/// E_{z~N(0,1)}[f(z)], exact when f is a polynomial of degree <= degree_hint.
double gauss_hermite_expect(const std::function<double(double)>& f, int degree_hint);

/// Project a polynomial-valued callable of known degree onto he_0..he_degree.
HermiteSeries project(const std::function<double(double)>& f, int degree);

}  // namespace reuse::hermite
