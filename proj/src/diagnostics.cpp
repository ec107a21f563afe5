#include "reuse/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "reuse/error.hpp"
#include "reuse/exponents.hpp"
#include "reuse/rng.hpp"
#include "reuse/trainer.hpp"

namespace reuse::diagnostics {

using hermite::HermiteSeries;

double ExpansionTerms::series_unprojected(double eta) const {
    double s = csq;
    for (double p : psi) s += p;
    return eta * s;
}

double ExpansionTerms::series_projected(double eta) const {
    double s = csq_projected;
    for (double p : psi_projected) s += p;
    return eta * s;
}

namespace {

// sigma^(k) for k = 0..deg+1 (the last one is zero).
std::vector<HermiteSeries> derivative_tower(const HermiteSeries& s) {
    std::vector<HermiteSeries> out{s};
    for (int k = 0; k <= std::max(0, s.degree()); ++k) out.push_back(hermite::derivative(out.back()));
    return out;
}

std::vector<double> psi_terms(const std::vector<HermiteSeries>& tower, double u, double y, double R, double tx,
                              double eta) {
    const int C = static_cast<int>(tower.size()) - 2;  // degree of sigma
    std::vector<double> psi(std::max(C, 0));
    const double s1 = hermite::eval(tower[1], u);
    double pw = 1.0;  // (eta R)^i y^i sigma'^i / i!
    for (int i = 0; i < C; ++i) {
        psi[i] = pw * y * hermite::eval(tower[i + 1], u) * tx;
        pw *= eta * R * y * s1 / (i + 1);
    }
    return psi;
}

}  // namespace

ExpansionTerms two_step_expansion_terms(const network::ActivationSpec& sigma, const Vector& w, const Vector& theta,
                                        const Vector& x, double y, double eta) {
    const auto tower = derivative_tower(sigma.series);
    const HermiteSeries& d1 = tower[1];
    ExpansionTerms t;

    const double u = w.dot(x);
    const double tx = theta.dot(x);
    const double R = x.squaredNorm();
    t.csq = y * hermite::eval(d1, u) * tx;
    t.psi = psi_terms(tower, u, y, R, tx, eta);
    {
        const double g0 = eta * y * hermite::eval(d1, u);
        const double u1 = u + g0 * R;
        const double g1 = eta * y * hermite::eval(d1, u1);
        t.realized_unprojected = (g0 + g1) * tx;
    }

    const Vector px = x - u * w;
    const double kappa = theta.dot(w);
    const double tpx = tx - kappa * u;
    const double RP = px.squaredNorm();
    t.csq_projected = y * hermite::eval(d1, u) * tpx;
    t.psi_projected = psi_terms(tower, u, y, RP, tpx, eta);
    {
        const double g0 = eta * y * hermite::eval(d1, u);
        const double u1 = u + g0 * RP;
        const double g1 = eta * y * hermite::eval(d1, u1);
        const Vector w2 = w + (g0 + g1) * px;
        t.realized_projected_normalized = theta.dot(w2) / w2.norm() - kappa;
    }
    return t;
}

double chi2_moment(int m, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= m + 2.0 * i;
    return r;
}

double analytic_leading_term(const model::LinkSpec& link, const network::ActivationSpec& sigma, double kappa,
                             double eta, double xi, int d) {
    const int I = link.power();
    const int ps = link.p_star();
    const double h = eta * (1.0 - xi);
    if (I == 1) {
        return 2.0 * h * ps * link.series[ps] * sigma.series[ps] * std::pow(kappa, ps - 1);
    }
    const double h_link = hermite::hermite_coeff(hermite::power(link.series, I), ps);
    const double f = exponents::weak_recovery_functional(sigma.series, I, ps - 1);
    return h * std::pow(eta, I - 1) * chi2_moment(d - 2, I - 1) / std::tgamma(I) * std::sqrt(ps) * h_link * f *
           std::pow(kappa, ps - 1);
}

double analytic_population_gain(const model::LinkSpec& link, const network::ActivationSpec& sigma, double kappa,
                                double eta, double xi, int d, double noise_std) {
    const auto tower = derivative_tower(sigma.series);
    const int C = std::max(sigma.series.degree(), 1);
    const int q = std::max(link.degree, 1);
    const int deg = 2 * q + 2 * ((C - 1) * (q + C + 1) + C) + 4;
    const auto& rule = hermite::gauss_hermite_rule(std::min(hermite::kMaxQuadratureNodes, hermite::nodes_for_degree(deg)));
    const auto& noise_rule = hermite::gauss_hermite_rule(noise_std > 0 ? std::min(hermite::kMaxQuadratureNodes, hermite::nodes_for_degree(4 * q + 8)) : 1);
    const int kmax = 2 * C + 2;
    std::vector<double> mu(kmax + 1);
    for (int k = 0; k <= kmax; ++k) mu[k] = chi2_moment(d - 2, k);
    // binomial coefficients
    std::vector<std::vector<double>> binom(kmax + 1, std::vector<double>(kmax + 1, 0.0));
    for (int m = 0; m <= kmax; ++m) {
        binom[m][0] = 1.0;
        for (int k = 1; k <= m; ++k) binom[m][k] = binom[m - 1][k - 1] + (k <= m - 1 ? binom[m - 1][k] : 0.0);
    }
    const double skap = std::sqrt(1.0 - kappa * kappa);
    double e_tg = 0.0, e_g2 = 0.0;
    std::vector<double> sp, sq, ER(kmax + 1);
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        const double u = rule.nodes[a];
        std::vector<double> der(tower.size());
        for (std::size_t k = 0; k < tower.size(); ++k) der[k] = hermite::eval(tower[k], u);
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
            const double v = rule.nodes[b];
            const double wuv = rule.weights[a] * rule.weights[b];
            // E[R^m] with R = v^2 + chi^2_{d-2}
            for (int m = 0; m <= kmax; ++m) {
                double s = 0.0;
                for (int k = 0; k <= m; ++k) s += binom[m][k] * std::pow(v * v, m - k) * mu[k];
                ER[m] = s;
            }
            const double clean = link.eval(kappa * u + skap * v);
            for (std::size_t c = 0; c < noise_rule.nodes.size(); ++c) {
                const double y = clean + (noise_std > 0 ? noise_std * noise_rule.nodes[c] : 0.0);
                const double wt = wuv * (noise_std > 0 ? noise_rule.weights[c] : 1.0);
                const double cc = eta * y * der[1];
                // S(R) = sigma'(u) + sigma'(u + cc R) as a polynomial in R.
                sp.assign(C, 0.0);
                double pw = 1.0;
                for (int m = 0; m < C; ++m) {
                    sp[m] = der[m + 1] * pw;
                    pw *= cc / (m + 1);
                }
                sp[0] += der[1];
                double es = 0.0;
                for (int m = 0; m < C; ++m) es += sp[m] * ER[m];
                e_tg += wt * y * skap * v * es;
                // S^2 R
                sq.assign(2 * C, 0.0);
                for (int m = 0; m < C; ++m) {
                    for (int n = 0; n < C; ++n) sq[m + n + 1] += sp[m] * sp[n];
                }
                double eg = 0.0;
                for (int m = 0; m < 2 * C; ++m) eg += sq[m] * ER[m];
                e_g2 += wt * y * y * eg;
            }
        }
    }
    const double h = eta * (1.0 - xi);
    return h * e_tg - 0.5 * kappa * h * h * e_g2;
}

GainEstimate population_gain(const model::LinkSpec& link, const network::ActivationSpec& sigma, double kappa,
                             double eta, double xi, int d, std::uint64_t n_mc, std::uint64_t seed, double noise_std) {
    if (n_mc == 0) throw Error(ErrorKind::Domain, "population_gain: n_mc must be positive");
    if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorKind::Domain, "population_gain: kappa must lie in (0, 1)");
    if (d < 2) throw Error(ErrorKind::Domain, "population_gain: d must be >= 2");
    const network::ActivationSpec poly(sigma.series);
    Vector theta = Vector::Zero(d);
    theta[0] = 1.0;
    Vector w0 = Vector::Zero(d);
    w0[0] = kappa;
    w0[1] = std::sqrt(1.0 - kappa * kappa);

    network::NetworkState st;
    st.W = Matrix(1, d);
    st.a = Vector::Ones(1);
    st.b = Vector::Zero(1);
    st.activations = {poly};
    kernels::Workspace ws;
    const model::DataConfig cfg{d, noise_std, seed};
    // Single neuron with a = 1: raw rate eta / 2 gives w += eta y sigma' P x.
    const double raw = eta / 2.0;

    // Control variate: the first-order (CSQ) part of the gain, whose mean is known exactly.
    const double h = eta * (1.0 - xi);
    double csq_mean = 0.0;
    for (int j = 1; j <= std::min(link.series.degree(), poly.series.degree()); ++j) {
        csq_mean += j * link.series[j] * poly.series[j] * std::pow(kappa, j - 1);
    }
    csq_mean *= 2.0 * h * (1.0 - kappa * kappa);

    double sum = 0.0, sumsq = 0.0, raw_sum = 0.0, raw_sumsq = 0.0;
    constexpr std::uint64_t chunk = 4096;
    for (std::uint64_t start = 0; start < n_mc; start += chunk) {
        const int n = static_cast<int>(std::min(chunk, n_mc - start));
        const model::Batch batch = model::sample_batch(link, theta, n, cfg, start, StreamPurpose::MonteCarlo);
        for (int i = 0; i < n; ++i) {
            st.W.row(0) = w0.transpose();
            st.step = 0;
            model::Batch one{batch.x.row(i), batch.y.segment(i, 1)};
            trainer::begin_pair(st, xi);
            trainer::pair_sgd(st, one, raw, raw, kernels::LossMode::Correlation, kernels::Backend::Serial, ws);
            trainer::begin_pair(st, xi);
            const double g = st.W(0, 0) - kappa;
            const double u = w0.dot(one.x.row(0).transpose());
            const double cv = 2.0 * h * one.y[0] * poly.deriv(u) * (one.x(0, 0) - kappa * u);
            raw_sum += g;
            raw_sumsq += g * g;
            sum += g - cv;
            sumsq += (g - cv) * (g - cv);
        }
    }
    GainEstimate e;
    e.count = n_mc;
    const double n = static_cast<double>(n_mc);
    const auto se_of = [&](double s1, double s2) {
        const double var = n_mc > 1 ? (s2 - s1 * s1 / n) / (n - 1.0) : 0.0;
        return std::sqrt(std::max(var, 0.0) / n);
    };
    e.mean = sum / n + csq_mean;
    e.se = se_of(sum, sumsq);
    e.raw_mean = raw_sum / n;
    e.raw_se = se_of(raw_sum, raw_sumsq);
    e.analytic_leading = analytic_leading_term(link, poly, kappa, eta, xi, d);
    e.analytic_population = analytic_population_gain(link, poly, kappa, eta, xi, d, noise_std);
    return e;
}

double init_tail_fraction(int d, std::uint64_t n_trials, double C2, std::uint64_t seed) {
    if (d < 2) throw Error(ErrorKind::Domain, "init_tail_fraction: d must be >= 2");
    if (n_trials == 0) throw Error(ErrorKind::Domain, "init_tail_fraction: n_trials must be positive");
    const double thr = 2.0 * C2 / std::sqrt(static_cast<double>(d));
    const std::uint64_t blocks = Stream::blocks_for_normals(static_cast<std::uint64_t>(d));
    std::vector<double> g(d);
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < n_trials; ++t) {
        Stream s(seed, StreamPurpose::MonteCarlo, 1, t * blocks);
        s.fill_normal(g);
        double nrm = 0.0;
        for (double v : g) nrm += v * v;
        if (g[0] / std::sqrt(nrm) >= thr) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_trials);
}

std::vector<double> bihari_lasalle_lower(double a0, double c, int p, std::int64_t T) {
    if (!(a0 > 0)) throw Error(ErrorKind::Domain, "bihari_lasalle_lower: a0 must be positive");
    if (c < 0) throw Error(ErrorKind::Domain, "bihari_lasalle_lower: c must be nonnegative");
    if (p < 3) throw Error(ErrorKind::Domain, "bihari_lasalle_lower: p must be >= 3");
    if (T < 0) throw Error(ErrorKind::Domain, "bihari_lasalle_lower: T must be nonnegative");
    const double k = c * (p - 2) * std::pow(a0, p - 2);
    if (k * static_cast<double>(T) >= 1.0) {
        throw Error(ErrorKind::Domain, "bihari_lasalle_lower: horizon reaches the blow-up time");
    }
    std::vector<double> out(static_cast<std::size_t>(T) + 1);
    for (std::int64_t t = 0; t <= T; ++t) out[t] = a0 / std::pow(1.0 - k * static_cast<double>(t), 1.0 / (p - 2));
    return out;
}

}  // namespace reuse::diagnostics
