#include "gpsl/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "gpsl/errors.hpp"
#include "gpsl/kernels.hpp"

namespace gpsl {

void MassDensityField::validate() const {
    for (const auto& p : point_masses)
        if (!(p.mass > 0.0)) throw ConfigError("MassDensityField: point mass must be > 0");
    for (const auto& g : gaussians) {
        if (!(g.mass > 0.0)) throw ConfigError("MassDensityField: blob mass must be > 0");
        if (!(g.sigma > 0.0)) throw ConfigError("MassDensityField: blob sigma must be > 0");
    }
}

double MassDensityField::total_mass() const {
    double m = 0.0;
    for (const auto& p : point_masses) m += p.mass;
    for (const auto& g : gaussians) m += g.mass;
    return m;
}

double MassDensityField::smeared_density(const Vec3& z, double r_C) const {
    double rho = 0.0;
    for (const auto& p : point_masses) rho += p.mass * gaussian_smear(z - p.position, r_C);
    for (const auto& g : gaussians) {
        const double s = std::sqrt(g.sigma * g.sigma + r_C * r_C);
        rho += g.mass * gaussian_smear(z - g.center, s);
    }
    return rho;
}

CovarianceResult gpsl_field_covariance(const Vec3& x, const Vec3& y,
                                       const MassDensityField& field,
                                       const ModelParams& params,
                                       const QuadratureConfig& cfg) {
    params.validate();
    field.validate();
    if (field.empty()) return {0.0, 0.0, false};

    const double r_C = params.r_C;
    const double sep = (x - y).norm();
    const double shell_scale = r_C + 0.5 * sep;
    const double mass = field.total_mass();

    Mixture3 mix;
    for (const auto& p : field.point_masses)
        mix.add_gaussian(p.mass / mass, p.position, r_C);
    for (const auto& g : field.gaussians)
        mix.add_gaussian(g.mass / mass, g.center,
                         std::sqrt(g.sigma * g.sigma + r_C * r_C));
    mix.add_coulomb_shell(0.5, x, shell_scale);
    mix.add_coulomb_shell(0.5, y, shell_scale);

    // Canonical component order: the estimate must not depend on whether the
    // caller said (x, y) or (y, x), nor on source listing order.
    std::sort(mix.components.begin(), mix.components.end(),
              [](const Mixture3::Component& a, const Mixture3::Component& b) {
                  return std::make_tuple(static_cast<int>(a.kind), a.center.x, a.center.y,
                                         a.center.z, a.scale, a.weight) <
                         std::make_tuple(static_cast<int>(b.kind), b.center.x, b.center.y,
                                         b.center.z, b.scale, b.weight);
              });

    const IntegralResult integral = integrate_r3_mixture(mix, cfg, [&](const Vec3& z) {
        const double rx = (x - z).norm();
        const double ry = (y - z).norm();
        if (rx == 0.0 || ry == 0.0) return 0.0;  // measure-zero; keep finite
        return field.smeared_density(z, r_C) / (rx * ry);
    });

    const PhysicalConstants& c = params.constants;
    const double scale = c.m0 * c.G * c.G / params.gamma;
    return {scale * integral.value, scale * integral.error_estimate, false};
}

CovarianceResult td_dp_covariance(const Vec3& x, const Vec3& y, const ModelParams& params) {
    params.validate();
    const double sep = (x - y).norm();
    if (sep == 0.0) return {0.0, 0.0, true};
    const PhysicalConstants& c = params.constants;
    return {c.hbar * c.G / (2.0 * sep), 0.0, false};
}

CovarianceResult td_csl_covariance(const Vec3& /*x*/, const Vec3& /*y*/,
                                   const ModelParams& params, const TDParams& td) {
    params.validate();
    td.validate();
    return {0.0, 0.0, true};
}

}  // namespace gpsl
