#include "reuse/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <string>

#include "reuse/error.hpp"

namespace reuse::hermite {

namespace {

// log(n!) in extended precision, n <= 2 * kDefaultDegreeCap + a margin.
const std::vector<long double>& log_factorials() {
    static const std::vector<long double> table = [] {
        std::vector<long double> t(260, 0.0L);
        for (std::size_t n = 1; n < t.size(); ++n) t[n] = t[n - 1] + std::log(static_cast<long double>(n));
        return t;
    }();
    return table;
}

// sqrt(m! n! (m+n-2k)!) / (k! (m-k)! (n-k)!)
long double linearization(int m, int n, int k) {
    const auto& lf = log_factorials();
    const long double lg = 0.5L * (lf[m] + lf[n] + lf[m + n - 2 * k]) - lf[k] - lf[m - k] - lf[n - k];
    return std::exp(lg);
}

std::vector<double> trim(std::vector<double> c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    return c;
}

}  // namespace

HermiteSeries::HermiteSeries(std::vector<double> coeffs) : coeffs_(trim(std::move(coeffs))) {}

HermiteSeries HermiteSeries::basis(int k, double scale) {
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    c[k] = scale;
    return HermiteSeries(std::move(c));
}

double HermiteSeries::norm() const {
    double s = 0.0;
    for (double c : coeffs_) s += c * c;
    return std::sqrt(s);
}

double HermiteSeries::zero_tolerance() const { return kZeroRelTol * std::max(1.0, norm()); }

bool HermiteSeries::is_zero_coeff(int i) const { return std::abs((*this)[i]) <= zero_tolerance(); }

HermiteSeries HermiteSeries::normalized() const {
    const double n = norm();
    if (n == 0.0) throw Error(ErrorKind::Undefined, "cannot normalize the zero series");
    return (1.0 / n) * *this;
}

HermiteSeries HermiteSeries::even_part() const {
    std::vector<double> c(coeffs_);
    for (std::size_t i = 1; i < c.size(); i += 2) c[i] = 0.0;
    return HermiteSeries(std::move(c));
}

HermiteSeries HermiteSeries::odd_part() const {
    std::vector<double> c(coeffs_);
    for (std::size_t i = 0; i < c.size(); i += 2) c[i] = 0.0;
    return HermiteSeries(std::move(c));
}

HermiteSeries operator+(const HermiteSeries& a, const HermiteSeries& b) {
    std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[static_cast<int>(i)] + b[static_cast<int>(i)];
    return HermiteSeries(std::move(c));
}

HermiteSeries operator-(const HermiteSeries& a, const HermiteSeries& b) { return a + (-1.0 * b); }

HermiteSeries operator*(double s, const HermiteSeries& a) {
    std::vector<double> c(a.coeffs_);
    for (double& v : c) v *= s;
    return HermiteSeries(std::move(c));
}

void basis_values(double z, std::span<double> out) {
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = z;
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        const double dn = static_cast<double>(n);
        out[n + 1] = (z * out[n] - std::sqrt(dn) * out[n - 1]) / std::sqrt(dn + 1.0);
    }
}

double eval(const HermiteSeries& s, double z) {
    const auto& c = s.coeffs();
    if (c.empty()) return 0.0;
    double prev = 0.0;
    double cur = 1.0;
    double acc = c[0];
    for (std::size_t n = 0; n + 1 < c.size(); ++n) {
        const double dn = static_cast<double>(n);
        const double next = (z * cur - std::sqrt(dn) * prev) / std::sqrt(dn + 1.0);
        prev = cur;
        cur = next;
        acc += c[n + 1] * cur;
    }
    return acc;
}

HermiteSeries from_monomial(std::span<const double> power_coeffs) {
    // Horner in the Hermite basis: z * he_n = sqrt(n+1) he_{n+1} + sqrt(n) he_{n-1}.
    std::vector<long double> acc;
    for (auto it = power_coeffs.rbegin(); it != power_coeffs.rend(); ++it) {
        std::vector<long double> next(acc.size() + 1, 0.0L);
        for (std::size_t n = 0; n < acc.size(); ++n) {
            next[n + 1] += std::sqrt(static_cast<long double>(n + 1)) * acc[n];
            if (n > 0) next[n - 1] += std::sqrt(static_cast<long double>(n)) * acc[n];
        }
        next[0] += *it;
        acc = std::move(next);
    }
    return HermiteSeries(std::vector<double>(acc.begin(), acc.end()));
}

std::vector<double> to_monomial(const HermiteSeries& s) {
    const auto& c = s.coeffs();
    if (c.empty()) return {};
    const std::size_t n = c.size();
    std::vector<long double> out(n, 0.0L);
    // Monomial coefficients of he_k, built by the normalized recurrence.
    std::vector<long double> prev;
    std::vector<long double> cur{1.0L};
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < cur.size(); ++i) out[i] += static_cast<long double>(c[k]) * cur[i];
        if (k + 1 == n) break;
        std::vector<long double> next(cur.size() + 1, 0.0L);
        const long double sk = std::sqrt(static_cast<long double>(k));
        const long double inv = 1.0L / std::sqrt(static_cast<long double>(k + 1));
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i] * inv;
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= sk * prev[i] * inv;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return std::vector<double>(out.begin(), out.end());
}

HermiteSeries multiply(const HermiteSeries& a, const HermiteSeries& b, int degree_cap) {
    if (a.is_zero() || b.is_zero()) return {};
    const int da = a.degree();
    const int db = b.degree();
    if (da + db > degree_cap) {
        throw Error(ErrorKind::DegreeCap, "product degree " + std::to_string(da + db) +
                                              " exceeds the degree cap " + std::to_string(degree_cap));
    }
    std::vector<long double> out(static_cast<std::size_t>(da + db) + 1, 0.0L);
    for (int m = 0; m <= da; ++m) {
        if (a[m] == 0.0) continue;
        for (int n = 0; n <= db; ++n) {
            if (b[n] == 0.0) continue;
            const long double ab = static_cast<long double>(a[m]) * b[n];
            for (int k = 0; k <= std::min(m, n); ++k) out[m + n - 2 * k] += ab * linearization(m, n, k);
        }
    }
    return HermiteSeries(std::vector<double>(out.begin(), out.end()));
}

HermiteSeries power(const HermiteSeries& a, int i, int degree_cap) {
    if (i < 0) throw Error(ErrorKind::Domain, "negative power");
    if (i == 0) return HermiteSeries::basis(0);
    if (a.degree() > 0 && static_cast<long>(a.degree()) * i > degree_cap) {
        throw Error(ErrorKind::DegreeCap, "power degree " + std::to_string(a.degree() * i) +
                                              " exceeds the degree cap " + std::to_string(degree_cap));
    }
    HermiteSeries out = a;
    for (int k = 1; k < i; ++k) out = multiply(out, a, degree_cap);
    return out;
}

HermiteSeries derivative(const HermiteSeries& a) {
    const auto& c = a.coeffs();
    if (c.size() <= 1) return {};
    std::vector<double> out(c.size() - 1);
    for (std::size_t j = 1; j < c.size(); ++j) out[j - 1] = c[j] * std::sqrt(static_cast<double>(j));
    return HermiteSeries(std::move(out));
}

HermiteSeries derivative(const HermiteSeries& a, int order) {
    HermiteSeries out = a;
    for (int k = 0; k < order; ++k) out = derivative(out);
    return out;
}

double hermite_coeff(const HermiteSeries& g, int j) { return g[j]; }

double hermite_coeff(const std::function<double(double)>& g, int j, std::optional<int> degree_hint) {
    if (!degree_hint) {
        throw Error(ErrorKind::Domain, "hermite_coeff on a callable needs a polynomial degree hint");
    }
    std::vector<double> he(static_cast<std::size_t>(j) + 1);
    return gauss_hermite_expect(
        [&](double z) {
            basis_values(z, he);
            return g(z) * he[j];
        },
        *degree_hint + j);
}

namespace {

QuadratureRule build_rule(int n) {
    QuadratureRule rule;
    if (n == 1) {
        rule.nodes = {0.0};
        rule.weights = {1.0};
        return rule;
    }
    // Golub-Welsch: Jacobi matrix of the probabilists' Hermite recurrence.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::Quadrature, "Golub-Welsch eigen-decomposition failed for n = " + std::to_string(n));
    }
    std::vector<double> x(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::sort(x.begin(), x.end());

    // Newton polish on he_n, then Christoffel weights 1 / sum_{k<n} he_k(x)^2.
    std::vector<double> he(static_cast<std::size_t>(n) + 1);
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        long double xi = x[i];
        for (int it = 0; it < 3; ++it) {
            long double prev = 0.0L, cur = 1.0L;
            for (int k = 0; k < n; ++k) {
                const long double next =
                    (xi * cur - std::sqrt(static_cast<long double>(k)) * prev) / std::sqrt(static_cast<long double>(k + 1));
                prev = cur;
                cur = next;
            }
            // cur = he_n, prev = he_{n-1}; he_n' = sqrt(n) he_{n-1}.
            const long double deriv = std::sqrt(static_cast<long double>(n)) * prev;
            if (deriv == 0.0L) break;
            xi -= cur / deriv;
        }
        rule.nodes[i] = static_cast<double>(xi);
        basis_values(rule.nodes[i], he);
        long double s = 0.0L;
        for (int k = 0; k < n; ++k) s += static_cast<long double>(he[k]) * he[k];
        rule.weights[i] = static_cast<double>(1.0L / s);
    }
    // Enforce exact symmetry about 0.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double xm = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double wm = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -xm;
        rule.nodes[j] = xm;
        rule.weights[i] = rule.weights[j] = wm;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const QuadratureRule& gauss_hermite_rule(int n) {
    if (n < 1 || n > kMaxQuadratureNodes) {
        throw Error(ErrorKind::Quadrature, "Gauss-Hermite node count " + std::to_string(n) +
                                               " outside [1, " + std::to_string(kMaxQuadratureNodes) + "]");
    }
    static std::array<std::once_flag, kMaxQuadratureNodes + 1> flags;
    static std::array<QuadratureRule, kMaxQuadratureNodes + 1> rules;
    std::call_once(flags[n], [n] { rules[n] = build_rule(n); });
    return rules[n];
}

int nodes_for_degree(int degree) { return std::max(1, (degree + 2) / 2); }

double gauss_hermite_expect(const std::function<double(double)>& f, int degree_hint) {
    if (degree_hint < 0) throw Error(ErrorKind::Domain, "negative degree hint");
    const auto& rule = gauss_hermite_rule(nodes_for_degree(degree_hint));
    long double acc = 0.0L;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += static_cast<long double>(rule.weights[i]) * f(rule.nodes[i]);
    return static_cast<double>(acc);
}

HermiteSeries project(const std::function<double(double)>& f, int degree) {
    const auto& rule = gauss_hermite_rule(nodes_for_degree(2 * degree));
    std::vector<long double> acc(static_cast<std::size_t>(degree) + 1, 0.0L);
    std::vector<double> he(static_cast<std::size_t>(degree) + 1);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        basis_values(rule.nodes[i], he);
        const long double fw = static_cast<long double>(rule.weights[i]) * f(rule.nodes[i]);
        for (int k = 0; k <= degree; ++k) acc[k] += fw * he[k];
    }
    return HermiteSeries(std::vector<double>(acc.begin(), acc.end()));
}

}  // namespace reuse::hermite
