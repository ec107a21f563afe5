#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reuse/error.hpp"
#include "reuse/hermite.hpp"

using namespace reuse;
using namespace reuse::hermite;

namespace {

HermiteSeries random_series(std::mt19937_64& gen, int max_degree) {
    std::uniform_int_distribution<int> deg(0, max_degree);
    std::normal_distribution<double> nd;
    std::vector<double> c(deg(gen) + 1);
    for (auto& v : c) v = nd(gen);
    return HermiteSeries(c);
}

double quad_coeff(const HermiteSeries& a, const HermiteSeries& b, int j) {
    const int deg = a.degree() + b.degree() + j;
    return gauss_hermite_expect(
        [&](double z) {
            std::vector<double> he(j + 1);
            basis_values(z, he);
            return eval(a, z) * eval(b, z) * he[j];
        },
        deg);
}

}  // namespace

TEST(HermiteEval, BasisValues) {
    EXPECT_DOUBLE_EQ(eval(HermiteSeries::basis(1), 1.3), 1.3);
    EXPECT_EQ(eval(HermiteSeries{}, 7.0), 0.0);
    EXPECT_NEAR(eval(HermiteSeries::basis(2), 0.0), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(HermiteEval, MatchesExplicitPolynomials) {
    for (int n = 0; n <= 10; ++n) {
        const auto p = oracle::hermite_normalized(n);
        for (double z : {-2.5, -0.3, 0.0, 0.7, 3.1}) {
            double v = 0.0;
            for (int k = n; k >= 0; --k) v = v * z + p[k];
            EXPECT_NEAR(eval(HermiteSeries::basis(n), z), v, 1e-10 * std::max(1.0, std::abs(v))) << n << " " << z;
        }
    }
}

TEST(HermiteSeriesType, NormIsCoefficientNorm) {
    HermiteSeries s{0.3, -1.2, 0.0, 2.0};
    EXPECT_NEAR(s.norm(), std::sqrt(0.09 + 1.44 + 4.0), 1e-15);
    const double l2 = gauss_hermite_expect([&](double z) { return eval(s, z) * eval(s, z); }, 6);
    EXPECT_NEAR(std::sqrt(l2), s.norm(), 1e-12);
    EXPECT_TRUE(HermiteSeries{}.is_zero());
    EXPECT_EQ(HermiteSeries({1.0, 0.0, 0.0}).degree(), 0);
}

TEST(HermiteBasisChange, MonomialExamples) {
    const auto z = from_monomial({0.0, 1.0});
    EXPECT_EQ(z, HermiteSeries::basis(1));
    const auto z2 = from_monomial({0.0, 0.0, 1.0});
    ASSERT_EQ(z2.degree(), 2);
    EXPECT_NEAR(z2[0], 1.0, 1e-15);
    EXPECT_NEAR(z2[1], 0.0, 1e-15);
    EXPECT_NEAR(z2[2], std::sqrt(2.0), 1e-15);
    EXPECT_EQ(from_monomial({1.0}), HermiteSeries::basis(0));
}

TEST(HermiteBasisChange, RoundTripUpToDegree24) {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 50; ++rep) {
        const auto s = random_series(gen, 24);
        const auto back = from_monomial(to_monomial(s));
        ASSERT_EQ(back.degree(), s.degree());
        for (int i = 0; i <= s.degree(); ++i) {
            EXPECT_NEAR(back[i], s[i], 1e-10 * std::max(1.0, std::abs(s[i])));
        }
    }
}

TEST(HermiteMultiply, SmallProductsAgainstMoments) {
    const auto he1sq = multiply(HermiteSeries::basis(1), HermiteSeries::basis(1));
    EXPECT_NEAR(he1sq[0], 1.0, 1e-14);
    EXPECT_NEAR(he1sq[2], std::sqrt(2.0), 1e-14);

    const auto he3sq = multiply(HermiteSeries::basis(3), HermiteSeries::basis(3));
    const auto h3 = oracle::hermite_normalized(3);
    const auto h3sq = oracle::mul(h3, h3);
    for (int j = 0; j <= 6; ++j) EXPECT_NEAR(he3sq[j], oracle::hermite_coeff(h3sq, j), 1e-12) << j;
    EXPECT_NEAR(he3sq[2], 3.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(he3sq[2], 36.0 / (6.0 * std::sqrt(2.0)), 1e-12);

    HermiteSeries b{0.5, -1.0, 2.0};
    EXPECT_EQ(multiply(HermiteSeries::basis(0), b), b);
}

TEST(HermiteMultiply, RandomPairsAgainstQuadrature) {
    std::mt19937_64 gen(5);
    for (int rep = 0; rep < 40; ++rep) {
        const auto a = random_series(gen, 12);
        const auto b = random_series(gen, 12);
        const auto p = multiply(a, b);
        EXPECT_EQ(p.degree(), a.degree() + b.degree());
        for (int j = 0; j <= p.degree(); ++j) {
            EXPECT_NEAR(p[j], quad_coeff(a, b, j), 1e-9 * std::max(1.0, std::abs(p[j])));
        }
    }
}

TEST(HermiteMultiply, DegreeCap) {
    const auto a = HermiteSeries::basis(40);
    try {
        multiply(a, a);
        FAIL() << "expected a degree-cap error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegreeCap);
    }
    EXPECT_NO_THROW(multiply(a, a, 80));
}

TEST(HermitePower, Examples) {
    const auto p = power(HermiteSeries::basis(1), 2);
    EXPECT_NEAR(p[0], 1.0, 1e-14);
    EXPECT_NEAR(p[2], std::sqrt(2.0), 1e-14);
    EXPECT_EQ(power(HermiteSeries{1.0, 2.0}, 0), HermiteSeries::basis(0));
    EXPECT_EQ(power(HermiteSeries::basis(3), 4).degree(), 12);
    // E[z^8] = 105 through the coefficient of he_0.
    EXPECT_NEAR(power(HermiteSeries::basis(1), 8)[0], 105.0, 1e-10);
}

TEST(HermitePower, CubeOfHe3) {
    const auto c = power(HermiteSeries::basis(3), 3);
    const auto h3 = oracle::hermite_normalized(3);
    const double oracle_value = oracle::hermite_coeff(oracle::pow(h3, 3), 1);
    EXPECT_NEAR(oracle_value, 324.0 / std::pow(6.0, 1.5), 1e-12);
    EXPECT_NEAR(c[1], oracle_value, 1e-10);
}

TEST(HermiteDerivative, IntegrationByParts) {
    // E[f'(z) g(z)] = E[f(z) (z g(z) - g'(z))].
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto f = random_series(gen, 8);
        const auto g = random_series(gen, 8);
        const auto df = derivative(f);
        const auto dg = derivative(g);
        const int deg = f.degree() + g.degree() + 1;
        const double lhs = gauss_hermite_expect([&](double z) { return eval(df, z) * eval(g, z); }, deg);
        const double rhs = gauss_hermite_expect(
            [&](double z) { return eval(f, z) * (z * eval(g, z) - eval(dg, z)); }, deg);
        EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(lhs)));
    }
    const auto d3 = derivative(HermiteSeries::basis(3), 3);
    ASSERT_EQ(d3.degree(), 0);
    EXPECT_NEAR(d3[0], std::sqrt(6.0), 1e-15);
    EXPECT_TRUE(derivative(HermiteSeries::basis(0)).is_zero());
}

TEST(HermiteCoeff, SeriesAndCallableAgree) {
    const HermiteSeries s{0.1, 0.0, -0.4, 1.5};
    for (int j = 0; j <= 5; ++j) {
        const double a = hermite_coeff(s, j);
        const double b = hermite_coeff([&](double z) { return eval(s, z); }, j, 3);
        EXPECT_NEAR(a, b, 1e-12);
    }
    EXPECT_THROW(hermite_coeff([](double z) { return z; }, 1, std::nullopt), Error);
}

TEST(Quadrature, WeightsAndMoments) {
    for (int n : {1, 2, 5, 20, 100, 200}) {
        const auto& r = gauss_hermite_rule(n);
        double s = 0.0;
        for (double w : r.weights) s += w;
        EXPECT_NEAR(s, 1.0, 1e-13) << n;
    }
    EXPECT_NEAR(gauss_hermite_expect([](double z) { return std::pow(z, 8); }, 8), 105.0, 1e-11);
    EXPECT_THROW(gauss_hermite_rule(0), Error);
    EXPECT_THROW(gauss_hermite_rule(kMaxQuadratureNodes + 1), Error);
    // The cache hands out the same object.
    EXPECT_EQ(&gauss_hermite_rule(17), &gauss_hermite_rule(17));
}

TEST(Quadrature, ProjectRecoversSeries) {
    const HermiteSeries s{0.0, 1.0, 0.5, 0.0, -0.25};
    const auto p = project([&](double z) { return eval(s, z); }, 4);
    for (int i = 0; i <= 4; ++i) EXPECT_NEAR(p[i], s[i], 1e-13);
}
