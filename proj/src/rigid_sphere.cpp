#include "gpsl/rigid_sphere.hpp"

#include <cmath>
#include <string>

#include "gpsl/errors.hpp"

namespace gpsl {

namespace {

// pi^{3/2} / (2 sqrt 2), the DP kernel prefactor.
const double kDpPrefactor = std::pow(M_PI, 1.5) / (2.0 * std::sqrt(2.0));

void check_x(const char* who, double x) {
    if (!(x >= 0.0)) throw DomainError(std::string(who) + ": argument must be >= 0");
}

/// Map three unit-cube coordinates to a uniform point in the unit ball
/// centered at `center`.
Vec3 uniform_ball(const Vec3& center, const double* u) {
    const double r = std::cbrt(u[0]);
    const double mu = 2.0 * u[1] - 1.0;
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    const double phi = 2.0 * M_PI * u[2];
    return center + Vec3{r * st * std::cos(phi), r * st * std::sin(phi), r * mu};
}

struct BallPair {
    Vec3 x_center, y_center;
    explicit BallPair(double x) : x_center{0.0, 0.0, -x}, y_center{0.0, 0.0, +x} {}
};

}  // namespace

void SphereSpec::validate() const {
    if (!(M > 0.0)) throw ConfigError("SphereSpec: M must be > 0");
    if (!(R > 0.0)) throw ConfigError("SphereSpec: R must be > 0");
}

SphereSpec SphereSpec::from_density(double mu0, double R) {
    if (!(mu0 > 0.0)) throw ConfigError("SphereSpec: density must be > 0");
    if (!(R > 0.0)) throw ConfigError("SphereSpec: R must be > 0");
    return SphereSpec{4.0 / 3.0 * M_PI * R * R * R * mu0, R};
}

double SphereSpec::density() const { return 3.0 * M / (4.0 * M_PI * R * R * R); }

double SphereSpec::r_m(const ModelParams& params) const {
    return params.constants.G * params.constants.m0 * M / (params.gamma * params.constants.hbar);
}

double k_c(double x) {
    check_x("k_c", x);
    if (x >= 1.0) return 0.0;
    return 1.0 - 1.5 * x + 0.5 * x * x * x;
}

double k_g_gpsl(double x) {
    check_x("k_g_gpsl", x);
    if (x >= 1.0) return 0.0;
    const double x2 = x * x;
    return 0.5 * x2 *
           ((3.0 + 60.0 * x2) * std::acos(x) -
            x * std::sqrt(1.0 - x2) * (13.0 + 50.0 * x2));
}

double k_g_dp(double x) {
    check_x("k_g_dp", x);
    if (x < 1.0) {
        const double x2 = x * x;
        return kDpPrefactor * (4.0 * x2 - 3.0 * x2 * x + 0.4 * x2 * x2 * x);
    }
    return kDpPrefactor * (2.4 - 1.0 / x);
}

double k_g_csl(double x) {
    check_x("k_g_csl", x);
    if (x < 1.0) {
        const double x2 = x * x;
        return M_PI / 70.0 * (56.0 * x2 - 28.0 * x2 * x2 + 14.0 * x2 * x2 * x - x2 * x2 * x2 * x);
    }
    return M_PI / 70.0 * (70.0 * x - 36.0 + 7.0 / x);
}

double f_sp(double x) {
    check_x("f_sp", x);
    if (x < 1.0) return (3.0 - x * x) / (6.0 * M_PI);
    return 1.0 / (3.0 * M_PI * x);
}

double ball_potential(double s) { return 3.0 * M_PI * f_sp(s); }

double ball_potential_quadrature(double s) {
    check_x("ball_potential_quadrature", s);
    QuadratureConfig cfg;
    cfg.strategy = QuadratureConfig::Strategy::adaptive_1d;
    // Piecewise-smooth integrand: split at the kink r = s when it is inside.
    const auto shell = [s](double r) { return 3.0 * r * r / std::max(r, s); };
    if (s > 0.0 && s < 1.0) {
        return integrate_1d(shell, 0.0, s, cfg).value + integrate_1d(shell, s, 1.0, cfg).value;
    }
    return integrate_1d(shell, 0.0, 1.0, cfg).value;
}

double chi_tilde(double k, double R) {
    if (!(k >= 0.0)) throw DomainError("chi_tilde: k must be >= 0");
    if (!(R > 0.0)) throw DomainError("chi_tilde: R must be > 0");
    const double u = k * R;
    const double norm = std::sqrt(2.0 / M_PI);
    if (u < 1e-3) {
        const double u2 = u * u;
        return norm * R * R * R * (1.0 / 3.0 - u2 / 30.0 + u2 * u2 / 840.0);
    }
    return norm * (std::sin(u) - u * std::cos(u)) / (k * k * k);
}

namespace {

void check_sharp_wall(const SphereSpec& sphere, const ModelParams& params) {
    sphere.validate();
    params.validate();
    if (sphere.R < 20.0 * params.r_C)
        throw ValidityError(
            "sphere rates use sharp-wall kernels valid only for R >= 20 r_C "
            "(got R/r_C = " +
            std::to_string(sphere.R / params.r_C) + ")");
}

}  // namespace

DecoherencePoint gamma_sphere_gpsl(double D, const SphereSpec& sphere,
                                   const ModelParams& params) {
    check_sharp_wall(sphere, params);
    if (!(D >= 0.0)) throw DomainError("gamma_sphere_gpsl: D must be >= 0");
    const double x = D / (2.0 * sphere.R);
    const double rm_over_R = sphere.r_m(params) / sphere.R;
    DecoherencePoint out;
    out.d_tilde = x;
    out.model = Model::GPSL_exact;
    out.rate = params.gamma * sphere.M / params.constants.m0 *
               (1.0 - k_c(x) + rm_over_R * rm_over_R * k_g_gpsl(x));
    return out;
}

DecoherencePoint gamma_sphere_dp(double D, const SphereSpec& sphere,
                                 const ModelParams& params) {
    check_sharp_wall(sphere, params);
    if (!(D >= 0.0)) throw DomainError("gamma_sphere_dp: D must be >= 0");
    const double x = D / (2.0 * sphere.R);
    const PhysicalConstants& c = params.constants;
    DecoherencePoint out;
    out.d_tilde = x;
    out.model = Model::TD_DP;
    out.rate = 2.0 * c.G * sphere.M * sphere.M / (c.hbar * sphere.R) * k_g_dp(x);
    return out;
}

DecoherencePoint gamma_sphere_csl(double D, const SphereSpec& sphere,
                                  const ModelParams& params, const TDParams& td) {
    check_sharp_wall(sphere, params);
    td.validate();
    if (!(D >= 0.0)) throw DomainError("gamma_sphere_csl: D must be >= 0");
    const double x = D / (2.0 * sphere.R);
    const PhysicalConstants& c = params.constants;
    const double mass_ratio = sphere.M / c.m0;
    const double collapse = 3.0 * td.gamma_csl / (4.0 * M_PI * sphere.R * sphere.R * sphere.R) *
                            mass_ratio * mass_ratio * (1.0 - k_c(x));
    const double gm = c.G * sphere.M * c.m0 / c.hbar;
    const double grav = sphere.R / td.gamma_csl * gm * gm * k_g_csl(x);
    DecoherencePoint out;
    out.d_tilde = x;
    out.model = Model::TD_CSL;
    out.rate = collapse + grav;
    return out;
}

double balance_radius(double mu0, const ModelParams& params) {
    params.validate();
    if (!(mu0 > 0.0)) throw DomainError("balance_radius: mu0 must be > 0");
    const PhysicalConstants& c = params.constants;
    return std::sqrt(3.0 * params.gamma * c.hbar / (4.0 * M_PI * c.G * c.m0 * mu0));
}

// ---------------------------------------------------------------------------
// Defining-integral oracles
// ---------------------------------------------------------------------------

IntegralResult k_c_mc(double x, const QuadratureConfig& cfg) {
    check_x("k_c_mc", x);
    if (x >= 1.0) return {0.0, 0.0, 0, true};
    const BallPair balls(x);
    return stratified_mc(3, cfg, [&](const double* u) {
        const Vec3 z = uniform_ball(balls.x_center, u);
        return (z - balls.y_center).norm2() <= 1.0 ? 1.0 : 0.0;
    });
}

IntegralResult k_g_gpsl_mc(double x, const QuadratureConfig& cfg) {
    check_x("k_g_gpsl_mc", x);
    if (x >= 1.0) return {0.0, 0.0, 0, true};
    const BallPair balls(x);
    return stratified_mc(3, cfg, [&](const double* u) {
        const Vec3 z = uniform_ball(balls.x_center, u);
        if ((z - balls.y_center).norm2() > 1.0) return 0.0;
        const double df =
            ball_potential((z - balls.x_center).norm()) - ball_potential((z - balls.y_center).norm());
        return 0.5 * df * df;
    });
}

IntegralResult k_g_dp_mc(double x, const QuadratureConfig& cfg) {
    check_x("k_g_dp_mc", x);
    const BallPair balls(x);
    return stratified_mc(3, cfg, [&](const double* u) {
        const Vec3 z = uniform_ball(balls.x_center, u);
        return 0.5 * (ball_potential((z - balls.x_center).norm()) -
                      ball_potential((z - balls.y_center).norm()));
    });
}

IntegralResult k_g_csl_mc(double x, const QuadratureConfig& cfg) {
    check_x("k_g_csl_mc", x);
    const BallPair balls(x);
    Mixture3 mix;
    mix.add_coulomb_shell(0.5, balls.x_center, 1.0);
    mix.add_coulomb_shell(0.5, balls.y_center, 1.0);
    IntegralResult out = integrate_r3_mixture(mix, cfg, [&](const Vec3& z) {
        const double df =
            ball_potential((z - balls.x_center).norm()) - ball_potential((z - balls.y_center).norm());
        return df * df;
    });
    out.value *= 0.125;
    out.error_estimate *= 0.125;
    return out;
}

IntegralResult unitary_term_sphere_check(double x, const QuadratureConfig& cfg) {
    check_x("unitary_term_sphere_check", x);
    if (x == 0.0 || x >= 1.0) return {0.0, 0.0, 0, true};
    const BallPair balls(x);
    return stratified_mc(3, cfg, [&](const double* u) {
        const Vec3 z = uniform_ball(balls.x_center, u);
        if ((z - balls.y_center).norm2() > 1.0) return 0.0;
        return std::sin(ball_potential((z - balls.x_center).norm()) -
                        ball_potential((z - balls.y_center).norm()));
    });
}

}  // namespace gpsl
