#include "gpsl/special.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "gpsl/rng.hpp"
#include "oracles.hpp"

namespace {

using namespace gpsl;
namespace oracle = gpsl::test_oracles;

TEST(Erf, MatchesFrozenHighPrecisionValues) {
    for (const auto& [x, expected] : oracle::kErfTable) {
        EXPECT_NEAR(gpsl::erf(x), expected, 1e-15) << "x = " << x;
    }
}

TEST(Erf, MatchesIndependentSeriesAtRandomPoints) {
    Xoshiro256 rng(1234);
    for (int i = 0; i < 200; ++i) {
        const double x = 3.5 * (2.0 * rng.uniform() - 1.0);
        // The alternating Maclaurin oracle cancels by ~e^{x^2}, which inflates
        // its own rounding error; budget for that so disagreement means a real
        // defect, not oracle noise.
        const double tol = 1e-15 + 5e-17 * std::exp(x * x) / (1.0 + std::abs(x));
        EXPECT_NEAR(gpsl::erf(x), oracle::series_erf(x), tol) << "x = " << x;
    }
}

TEST(Erf, IsOddAndSaturates) {
    for (double x : {0.1, 0.7, 1.3, 2.9, 4.2}) {
        EXPECT_DOUBLE_EQ(gpsl::erf(-x), -gpsl::erf(x));
    }
    EXPECT_DOUBLE_EQ(gpsl::erf(0.0), 0.0);
    EXPECT_DOUBLE_EQ(gpsl::erf(10.0), 1.0);
    EXPECT_DOUBLE_EQ(gpsl::erf(-10.0), -1.0);
}

TEST(Erfc, ComplementsErfAndKeepsPrecisionInTail) {
    for (double x : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        EXPECT_NEAR(gpsl::erfc(x), 1.0 - gpsl::erf(x), 1e-15);
    }
    // In the far tail 1 - erf(x) underflows to 0 in double arithmetic while
    // erfc keeps relative accuracy; check against erfc(x) ~ e^{-x^2}/(x sqrt(pi))
    // including the leading 1/(2x^2) correction.
    for (double x : {6.0, 8.0, 10.0}) {
        const double asym =
            std::exp(-x * x) / (x * std::sqrt(M_PI)) * (1.0 - 0.5 / (x * x));
        EXPECT_NEAR(gpsl::erfc(x) / asym, 1.0, 1e-3) << "x = " << x;
    }
}

TEST(BesselI0, MatchesFrozenValuesAndSeries) {
    for (const auto& [x, expected] : oracle::kI0Table) {
        EXPECT_NEAR(bessel_i0(x) / expected, 1.0, 2e-15) << "x = " << x;
    }
    Xoshiro256 rng(77);
    for (int i = 0; i < 100; ++i) {
        const double x = 30.0 * rng.uniform();
        EXPECT_NEAR(bessel_i0(x) / oracle::series_i0(x), 1.0, 2e-14) << "x = " << x;
    }
}

TEST(BesselI0, ScaledVariantIsFiniteAndConsistent) {
    for (const auto& [x, expected] : oracle::kI0eTable) {
        EXPECT_NEAR(bessel_i0e(x) / expected, 1.0, 2e-14) << "x = " << x;
    }
    // Where both forms are representable they must agree.
    for (double x : {0.5, 2.0, 10.0, 50.0}) {
        EXPECT_NEAR(bessel_i0e(x), bessel_i0(x) * std::exp(-x), 1e-14 * bessel_i0e(x));
    }
    // i0e(x) = e^{-x} I0(x) decreases monotonically for x > 0.
    double prev = bessel_i0e(0.0);
    EXPECT_DOUBLE_EQ(prev, 1.0);
    for (double x = 0.5; x <= 800.0; x *= 2.0) {
        const double cur = bessel_i0e(x);
        EXPECT_LT(cur, prev) << "x = " << x;
        prev = cur;
    }
}

TEST(InverseNormalCdf, MatchesFrozenValues) {
    for (const auto& [p, expected] : oracle::kInvPhiTable) {
        EXPECT_NEAR(inv_normal_cdf(p), expected, 1e-13 + 1e-13 * std::abs(expected))
            << "p = " << p;
    }
}

TEST(InverseNormalCdf, RoundTripsThroughErfc) {
    // Phi(z) = gpsl::erfc(-z / sqrt(2)) / 2; the inverse must invert it.
    Xoshiro256 rng(99);
    for (int i = 0; i < 200; ++i) {
        const double p = rng.uniform_open();
        const double z = inv_normal_cdf(p);
        const double back = 0.5 * gpsl::erfc(-z / std::sqrt(2.0));
        EXPECT_NEAR(back, p, 2e-14) << "p = " << p;
    }
    for (double p : {0.2, 0.35, 0.41, 0.77}) {
        EXPECT_NEAR(inv_normal_cdf(p), -inv_normal_cdf(1.0 - p), 1e-13);
    }
}

TEST(RegularizedGamma, MatchesFrozenValuesAndSumsToOne) {
    for (const auto& [a, x, expected] : oracle::kGammaPTable) {
        EXPECT_NEAR(regularized_gamma_p(a, x), expected, 1e-13)
            << "a = " << a << ", x = " << x;
        EXPECT_NEAR(regularized_gamma_p(a, x) + regularized_gamma_q(a, x), 1.0, 1e-14);
    }
    EXPECT_DOUBLE_EQ(regularized_gamma_p(3.0, 0.0), 0.0);
    // P(1, x) = 1 - e^{-x} in closed form.
    for (double x : {0.3, 1.0, 4.0}) {
        EXPECT_NEAR(regularized_gamma_p(1.0, x), 1.0 - std::exp(-x), 1e-14);
    }
}

TEST(ChiSquaredPvalue, AgreesWithGammaTailAndClosedForms) {
    // Upper-tail p-value of a chi-squared statistic equals Q(k/2, x/2).
    for (double k : {1.0, 2.0, 5.0, 16.0}) {
        for (double x : {0.5, 2.0, 10.0, 30.0}) {
            EXPECT_NEAR(chi_squared_pvalue(x, k), regularized_gamma_q(0.5 * k, 0.5 * x),
                        1e-13);
        }
    }
    // Two degrees of freedom: p = e^{-x/2} exactly.
    EXPECT_NEAR(chi_squared_pvalue(3.0, 2.0), std::exp(-1.5), 1e-14);
    // Null statistic has p-value 1.
    EXPECT_DOUBLE_EQ(chi_squared_pvalue(0.0, 4.0), 1.0);
}

TEST(KolmogorovQ, MatchesFrozenValuesAndLimits) {
    for (const auto& [lambda, expected] : oracle::kKolmogorovQTable) {
        EXPECT_NEAR(kolmogorov_q(lambda), expected, 1e-13) << "lambda = " << lambda;
    }
    EXPECT_DOUBLE_EQ(kolmogorov_q(0.0), 1.0);
    EXPECT_NEAR(kolmogorov_q(4.0), 2.0 * std::exp(-32.0), 1e-16);
    // Monotone decreasing survival function.
    double prev = kolmogorov_q(0.2);
    for (double l = 0.4; l <= 2.4; l += 0.2) {
        const double cur = kolmogorov_q(l);
        EXPECT_LT(cur, prev) << "lambda = " << l;
        prev = cur;
    }
}

}  // namespace
