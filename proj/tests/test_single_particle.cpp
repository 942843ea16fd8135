#include "gpsl/single_particle.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gpsl/errors.hpp"
#include "gpsl/rng.hpp"
#include "oracles.hpp"

namespace {

using namespace gpsl;
namespace oracle = gpsl::test_oracles;

QuadratureConfig mc_config(std::uint64_t seed, std::uint64_t samples) {
    QuadratureConfig cfg;
    cfg.seed = seed;
    cfg.max_evals = samples;
    return cfg;
}

TEST(FtildeQuadrature, MatchesFrozenIndependentValues) {
    for (const auto& [d, expected] : oracle::kFtildeTable) {
        auto res = f_tilde_quadrature(d);
        EXPECT_TRUE(res.converged);
        EXPECT_NEAR(res.value, expected, 2e-6) << "d = " << d;
    }
}

TEST(FtildeMc, AgreesWithQuadratureWithinError) {
    for (double d : {0.3, 1.0, 3.5}) {
        auto det = f_tilde_quadrature(d);
        auto mc = f_tilde_mc(d, mc_config(3, 400000));
        ASSERT_GT(mc.error_estimate, 0.0);
        EXPECT_NEAR(mc.value, det.value, 3.0 * mc.error_estimate) << "d = " << d;
    }
}

TEST(FtildeMc, VanishesAtZeroAndRejectsNegativeSeparation) {
    // The integrand carries sin(d k cos) sin(d v cos): d = 0 kills it exactly.
    auto zero = f_tilde_mc(0.0, mc_config(1, 50000));
    EXPECT_EQ(zero.value, 0.0);
    EXPECT_THROW(f_tilde_mc(-0.7, mc_config(5, 1000)), DomainError);
}

TEST(FtildeStrategyDispatch, SelectsDeterministicOrMc) {
    QuadratureConfig det;
    det.strategy = QuadratureConfig::Strategy::adaptive_1d;
    auto a = f_tilde(1.0, det);
    EXPECT_EQ(a.value, f_tilde_quadrature(1.0).value);
    auto b = f_tilde(1.0, mc_config(9, 100000));
    EXPECT_EQ(b.value, f_tilde_mc(1.0, mc_config(9, 100000)).value);
}

TEST(FtildeTableTest, InterpolatesAndExtendsTail) {
    FtildeTable table(2.0, 0.1, 40, 28);
    // On-grid nodes reproduce the quadrature values they were built from.
    EXPECT_NEAR(table(1.0), f_tilde_quadrature(1.0, 40, 28).value, 1e-9);
    // Off-grid interpolation error is far below curve scale.
    EXPECT_NEAR(table(0.77), f_tilde_quadrature(0.77, 40, 28).value, 1e-3);

    const auto& std_table = FtildeTable::standard();
    EXPECT_NEAR(std_table(1.0), 3.140976, 2e-6);
    // Beyond the grid the table extends with the fitted exponential decay:
    // log-slope between 6.5 and 7.5 stays in the tail band.
    const double slope = std::log(std_table(7.5) / std_table(6.5));
    EXPECT_LT(slope, -1.0 / 1.5);
    EXPECT_GT(slope, -1.0 / 1.1);
    // Continuity across the grid edge.
    EXPECT_NEAR(std_table(6.0 - 1e-9) / std_table(6.0 + 1e-9), 1.0, 1e-6);
}

TEST(GammaGpslExact, ReproducesFrozenRateAtUnitSeparation) {
    // mass 0.1 in unit-free parameters gives feedback length r_p = 0.1 r_C.
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{0.1};
    ASSERT_NEAR(particle.r_p(params), 0.1, 1e-15);
    auto pt = gamma_gpsl_exact(1.0, particle, params, mc_config(7, 400000));
    EXPECT_FALSE(pt.validity_warning);
    ASSERT_GT(pt.error, 0.0);
    // Frozen reference: 0.1 * 0.39356705 (rate scales linearly with mass).
    EXPECT_NEAR(pt.rate, 0.039356705, 3.0 * pt.error + 1e-7);
}

TEST(GammaGpslExact, CollapseOnlyLimitAtVanishingFeedback) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec tiny{1e-8};
    auto pt = gamma_gpsl_exact(1.5, tiny, params, mc_config(11, 200000));
    // With r_p ~ 1e-8 the gravitational phase is invisible: pure collapse law.
    const double collapse = 1e-8 * (1.0 - std::exp(-1.5 * 1.5 / 2.0));
    EXPECT_NEAR(pt.rate / 1e-8, collapse / 1e-8, 3.0 * pt.error / 1e-8 + 1e-9);
}

TEST(GammaGpslExact, PlateausExactlyAtLargeSeparation) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{0.1};
    auto pt = gamma_gpsl_exact(50.0, particle, params, mc_config(1, 1000));
    // The Gaussian overlap underflows: the rate is the plateau, deterministically.
    EXPECT_NEAR(pt.rate, gamma_gpsl_limit(particle, params), 1e-10 * pt.rate);
    EXPECT_EQ(pt.error, 0.0);
    EXPECT_NEAR(gamma_gpsl_limit(particle, params), 0.1, 1e-15);
}

TEST(GammaGpslExact, FlagsStrongFeedbackWithoutRefusing) {
    ModelParams params = ModelParams::unit_free();
    auto strong = gamma_gpsl_exact(1.0, ParticleSpec{0.5}, params, mc_config(1, 50000));
    EXPECT_TRUE(strong.validity_warning);
    EXPECT_TRUE(std::isfinite(strong.rate));
    auto weak = gamma_gpsl_exact(1.0, ParticleSpec{0.05}, params, mc_config(1, 50000));
    EXPECT_FALSE(weak.validity_warning);
}

TEST(GammaGpslPerturbative, MatchesExactInsideTrustRegion) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{0.1};
    auto pert = gamma_gpsl_perturbative(1.0, particle, params);
    auto exact = gamma_gpsl_exact(1.0, particle, params, mc_config(23, 1000000));
    // Residual is O((r_p/r_C)^4): far below the feedback correction itself.
    EXPECT_NEAR(pert.rate, exact.rate, 3.0 * exact.error + 1e-6);

    // The gravitational correction at d = 1 is the frozen 9.8e-5 shift
    // (per unit mass ratio) on top of the collapse-only rate.
    const double collapse = 0.1 * (1.0 - std::exp(-0.5));
    EXPECT_NEAR(pert.rate - collapse, 0.1 * 9.8e-5, 0.1 * 2e-6);
}

TEST(GammaGpslPerturbative, DirectEvaluationAgreesWithTable) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{0.08};
    auto table = gamma_gpsl_perturbative(0.8, particle, params);
    auto direct = gamma_gpsl_perturbative_direct(0.8, particle, params,
                                                 mc_config(31, 400000));
    EXPECT_NEAR(direct.rate, table.rate, 3.0 * direct.error + 1e-8);
}

TEST(GammaGpslPerturbative, RejectsFeedbackBeyondTrustRegion) {
    ModelParams params = ModelParams::unit_free();
    EXPECT_THROW(gamma_gpsl_perturbative(1.0, ParticleSpec{0.11}, params), ValidityError);
    EXPECT_THROW(
        gamma_gpsl_perturbative_direct(1.0, ParticleSpec{0.2}, params, mc_config(1, 1000)),
        ValidityError);
    // Exactly at the boundary stays usable.
    EXPECT_NO_THROW(gamma_gpsl_perturbative(1.0, ParticleSpec{0.1}, params));
}

TEST(GammaTdDp, MatchesIndependentSmallSeparationSeries) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{1.0};
    const double pref = gamma_td_dp_limit(particle, params);
    // Gamma = pref (d^2/3 - d^4/10 + d^6/42 - d^8/216 + ...) from the erf
    // expansion, derived separately from the closed form in the library.
    for (double d : {0.05, 0.2, 0.5}) {
        const double d2 = d * d;
        const double series =
            pref * d2 * (1.0 / 3.0 + d2 * (-0.1 + d2 * (1.0 / 42.0 - d2 / 216.0)));
        auto pt = gamma_td_dp(d, particle, params);
        EXPECT_NEAR(pt.rate / series, 1.0, 1e-5) << "d = " << d;
    }
}

TEST(GammaTdDp, SeriesAndClosedFormJoinContinuously) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{2.0};
    const double split = 1e-4;
    const double below = gamma_td_dp(std::nextafter(split, 0.0), particle, params).rate;
    const double above = gamma_td_dp(std::nextafter(split, 1.0), particle, params).rate;
    // Just above the switch the closed form cancels to ~d^2/3 = 3.3e-9, so up
    // to ~1e-7 relative rounding noise survives there; the series branch is the
    // accurate one. The seam must stay within that cancellation budget.
    EXPECT_NEAR(below / above, 1.0, 1e-7);
}

TEST(GammaTdDp, PlateauAndMassScaling) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec one{1.0}, two{2.0};
    // The curve approaches the plateau as pref (1 - sqrt(pi)/(2 d)).
    const double pref = gamma_td_dp_limit(one, params);
    EXPECT_NEAR(gamma_td_dp(50.0, one, params).rate,
                pref * (1.0 - std::sqrt(M_PI) / 100.0), 1e-12 * pref);
    // Plateau is quadratic in mass: 2 sqrt(2) pi G m^2 / (hbar r_C).
    EXPECT_NEAR(gamma_td_dp_limit(two, params) / gamma_td_dp_limit(one, params), 4.0,
                1e-13);
    EXPECT_NEAR(pref, 2.0 * std::sqrt(2.0) * M_PI, 1e-12 * pref);
}

TEST(GammaTdCsl, MatchesIndependentSmallSeparationSeries) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{1.0};
    TDParams td;  // gamma_csl = 1
    const double collapse_pref = std::pow(4.0 * M_PI, -1.5);
    const double grav_pref = M_PI;  // pi r_C (m0 m G / hbar)^2 / gamma_csl, unit-free
    for (double d : {0.05, 0.1}) {
        const double d2 = d * d;
        // B(d) = (2/(3 sqrt(pi))) d^2 (1 - d^2/10 + ...), derived separately.
        const double series = collapse_pref * d2 * (1.0 - d2 / 2.0) +
                              grav_pref * 2.0 / (3.0 * std::sqrt(M_PI)) * d2 *
                                  (1.0 - d2 / 10.0);
        auto pt = gamma_td_csl(d, particle, params, td);
        EXPECT_NEAR(pt.rate / series, 1.0, 1e-5) << "d = " << d;
    }
}

TEST(GammaTdCsl, SeriesAndClosedFormJoinContinuously) {
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{1.0};
    TDParams td;
    const double split = 1e-4;
    const double below = gamma_td_csl(std::nextafter(split, 0.0), particle, params, td).rate;
    const double above = gamma_td_csl(std::nextafter(split, 1.0), particle, params, td).rate;
    // Same cancellation budget as the sibling check above.
    EXPECT_NEAR(below / above, 1.0, 1e-7);
}

TEST(GammaTdCsl, GravitationalTailGrowsLinearly) {
    // At large d the collapse part saturates and B(d) -> d + O(1/d): the
    // secant slope approaches the gravitational prefactor.
    ModelParams params = ModelParams::unit_free();
    ParticleSpec particle{1.0};
    TDParams td;
    const double slope = gamma_td_csl(30.0, particle, params, td).rate -
                         gamma_td_csl(29.0, particle, params, td).rate;
    EXPECT_NEAR(slope / M_PI, 1.0, 1e-3);
}

TEST(CrossoverMass, MatchesClosedFormAndBalancesPlateaus) {
    ModelParams params = ModelParams::unit_free();
    const double m_star = crossover_mass(params);
    // Linear-in-mass and quadratic-in-mass plateaus cross at
    // m* = gamma hbar r_C / (2 sqrt(2) pi G m0): unit-free 1/(2 sqrt(2) pi).
    EXPECT_NEAR(m_star, 1.0 / (2.0 * std::sqrt(2.0) * M_PI), 1e-12);
    EXPECT_NEAR(m_star, 0.112540, 1e-6);
    ParticleSpec at{m_star};
    EXPECT_NEAR(gamma_gpsl_limit(at, params), gamma_td_dp_limit(at, params),
                1e-12 * gamma_gpsl_limit(at, params));
}

TEST(SelfInteractionNull, VanishesWithinMonteCarloError) {
    for (double d : {0.5, 2.0}) {
        auto res = self_interaction_null_check(d, mc_config(17, 200000));
        ASSERT_GT(res.error_estimate, 0.0);
        EXPECT_LE(std::abs(res.value), 3.0 * res.error_estimate) << "d = " << d;
    }
}

TEST(QuadraticCoefficientFit, RecoversPlantedCoefficient) {
    Xoshiro256 rng(41);
    std::vector<double> d, v, s;
    const double planted = 4.49;
    for (double x = 0.01; x <= 0.3; x += 0.01) {
        const double sigma = 1e-4;
        d.push_back(x);
        v.push_back(planted * x * x + sigma * rng.normal());
        s.push_back(sigma);
    }
    auto fit = fit_quadratic_coefficient(d, v, s);
    ASSERT_GT(fit.std_error, 0.0);
    EXPECT_NEAR(fit.coefficient, planted, 4.0 * fit.std_error);
}

TEST(QuadraticCoefficientFit, SurvivesZeroUncertainties) {
    // Deterministic quadrature points report error 0; the fit must not
    // produce infinite weights.
    std::vector<double> d{0.1, 0.2, 0.3}, v, s{0.0, 0.0, 0.0};
    for (double x : d) v.push_back(2.5 * x * x);
    auto fit = fit_quadratic_coefficient(d, v, s);
    EXPECT_TRUE(std::isfinite(fit.coefficient));
    EXPECT_NEAR(fit.coefficient, 2.5, 1e-12);
}

TEST(LogLinearFit, RecoversExactExponential) {
    std::vector<double> d, v, s;
    for (double x = 3.5; x <= 6.0; x += 0.25) {
        d.push_back(x);
        v.push_back(2.1 * std::exp(-(x - 3.5) / 1.3));
        s.push_back(1e-6);
    }
    auto fit = fit_log_linear(d, v, s);
    EXPECT_NEAR(fit.slope, -1.0 / 1.3, 1e-10);
    EXPECT_NEAR(std::exp(fit.intercept + fit.slope * 3.5), 2.1, 1e-9);
}

}  // namespace
