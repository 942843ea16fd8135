#include "gpsl/fluctuations.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "gpsl/errors.hpp"

namespace {

using namespace gpsl;

QuadratureConfig mc_config(std::uint64_t seed, std::uint64_t samples) {
    QuadratureConfig cfg;
    cfg.seed = seed;
    cfg.max_evals = samples;
    return cfg;
}

TEST(MassDensityFieldTest, ValidatesAndSumsMass) {
    MassDensityField field;
    EXPECT_TRUE(field.empty());
    EXPECT_DOUBLE_EQ(field.total_mass(), 0.0);

    field.point_masses.push_back({2.0, Vec3()});
    field.gaussians.push_back({3.0, Vec3(1.0, 0.0, 0.0), 0.5});
    EXPECT_FALSE(field.empty());
    EXPECT_DOUBLE_EQ(field.total_mass(), 5.0);
    EXPECT_NO_THROW(field.validate());

    MassDensityField bad;
    bad.point_masses.push_back({-1.0, Vec3()});
    EXPECT_THROW(bad.validate(), ConfigError);
    MassDensityField bad_sigma;
    bad_sigma.gaussians.push_back({1.0, Vec3(), 0.0});
    EXPECT_THROW(bad_sigma.validate(), ConfigError);
}

TEST(MassDensityFieldTest, SmearingWidensSourcesCorrectly) {
    const double r_C = 0.8;
    // A point mass smears to N(position, r_C^2).
    MassDensityField point;
    point.point_masses.push_back({2.0, Vec3(0.0, 0.0, 1.0)});
    const double at_center = point.smeared_density(Vec3(0.0, 0.0, 1.0), r_C);
    EXPECT_NEAR(at_center, 2.0 * std::pow(2.0 * M_PI * r_C * r_C, -1.5), 1e-14);

    // A blob of width sigma smears to sqrt(sigma^2 + r_C^2).
    MassDensityField blob;
    blob.gaussians.push_back({3.0, Vec3(), 0.6});
    const double s_eff2 = 0.6 * 0.6 + r_C * r_C;
    EXPECT_NEAR(blob.smeared_density(Vec3(), r_C),
                3.0 * std::pow(2.0 * M_PI * s_eff2, -1.5), 1e-14);
    // One effective width out: peak suppressed by e^{-1/2}.
    const Vec3 off(std::sqrt(s_eff2), 0.0, 0.0);
    EXPECT_NEAR(blob.smeared_density(off, r_C) / blob.smeared_density(Vec3(), r_C),
                std::exp(-0.5), 1e-12);
}

TEST(GpslCovariance, EmptyDensityGivesExactZero) {
    MassDensityField field;
    ModelParams params = ModelParams::unit_free();
    auto res = gpsl_field_covariance(Vec3(), Vec3(1.0, 0.0, 0.0), field, params,
                                     mc_config(1, 100000));
    EXPECT_FALSE(res.divergent);
    EXPECT_EQ(res.value, 0.0);
    EXPECT_EQ(res.error, 0.0);
}

TEST(GpslCovariance, FiniteAtCoincidenceWithUnitSourceValueOne) {
    // A unit point mass at the origin observed at x = y = 0 integrates
    // rho_smeared / |z|^2, which equals exactly 1 in unit-free parameters.
    MassDensityField field;
    field.point_masses.push_back({1.0, Vec3()});
    ModelParams params = ModelParams::unit_free();
    auto res = gpsl_field_covariance(Vec3(), Vec3(), field, params,
                                     mc_config(7, 400000));
    ASSERT_FALSE(res.divergent);
    ASSERT_GT(res.error, 0.0);
    EXPECT_NEAR(res.value, 1.0, 3.0 * res.error);
    EXPECT_LT(res.error, 0.01);
}

TEST(GpslCovariance, SymmetricUnderSwapBitwise) {
    MassDensityField field;
    field.point_masses.push_back({2.0, Vec3(0.0, 0.0, 0.0)});
    field.gaussians.push_back({1.0, Vec3(3.0, 0.0, 0.0), 1.0});
    ModelParams params = ModelParams::unit_free();
    const Vec3 x(0.0, 0.0, 0.0), y(0.0, 0.0, 2.0);
    auto xy = gpsl_field_covariance(x, y, field, params, mc_config(11, 100000));
    auto yx = gpsl_field_covariance(y, x, field, params, mc_config(11, 100000));
    EXPECT_EQ(xy.value, yx.value);
    EXPECT_EQ(xy.error, yx.error);
}

TEST(GpslCovariance, DecaysWithSeparationAndAddsOverSources) {
    // Two sources of masses 2 and 1: the frozen smoke value at separation 3
    // along the source axis.
    MassDensityField field;
    field.point_masses.push_back({2.0, Vec3()});
    field.point_masses.push_back({1.0, Vec3(3.0, 0.0, 0.0)});
    ModelParams params = ModelParams::unit_free();
    auto cfg = mc_config(1, 200000);
    auto near = gpsl_field_covariance(Vec3(), Vec3(), field, params, cfg);
    ASSERT_FALSE(near.divergent);
    EXPECT_NEAR(near.value, 2.1283, 3.0 * near.error + 2e-3);

    // Moving one observation point away decreases the covariance.
    auto far = gpsl_field_covariance(Vec3(), Vec3(0.0, 0.0, 4.0), field, params, cfg);
    EXPECT_LT(far.value, near.value);
    EXPECT_GT(far.value, 0.0);
}

TEST(TdDpCovariance, InverseSeparationLawWithCoincidenceDivergence) {
    ModelParams params = ModelParams::unit_free();
    for (double s : {0.5, 1.0, 4.0}) {
        auto res = td_dp_covariance(Vec3(), Vec3(0.0, 0.0, s), params);
        EXPECT_FALSE(res.divergent);
        EXPECT_NEAR(res.value, params.constants.hbar * params.constants.G / (2.0 * s),
                    1e-14 / s)
            << "s = " << s;
        EXPECT_EQ(res.error, 0.0);  // closed form
    }
    auto at_zero = td_dp_covariance(Vec3(1.0, 2.0, 3.0), Vec3(1.0, 2.0, 3.0), params);
    EXPECT_TRUE(at_zero.divergent);
}

TEST(TdCslCovariance, WhiteNoiseIsDivergentEverywhere) {
    ModelParams params = ModelParams::unit_free();
    TDParams td;
    for (double s : {0.0, 1.0, 10.0}) {
        auto res = td_csl_covariance(Vec3(), Vec3(0.0, 0.0, s), params, td);
        EXPECT_TRUE(res.divergent) << "s = " << s;
    }
}

}  // namespace
