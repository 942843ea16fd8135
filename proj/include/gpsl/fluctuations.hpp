#pragma once

#include <vector>

#include "gpsl/constants.hpp"
#include "gpsl/quadrature.hpp"
#include "gpsl/vec3.hpp"

/// Spatial covariance of the effective gravitational-potential noise felt by
/// test masses. GPSL carries its noise through the collapse events
/// themselves, so the covariance is sourced by the smeared mass density and
/// stays finite everywhere; the two Tilloy-Diosi comparators inject white
/// noise whose covariance is singular (DP at coincidence, CSL everywhere).

namespace gpsl {

/// Mass density as point masses plus isotropic Gaussian blobs.
struct MassDensityField {
    struct PointMass {
        double mass = 1.0;
        Vec3 position{};
    };
    struct GaussianBlob {
        double mass = 1.0;
        Vec3 center{};
        double sigma = 1.0;
    };

    std::vector<PointMass> point_masses;
    std::vector<GaussianBlob> gaussians;

    void validate() const;
    bool empty() const { return point_masses.empty() && gaussians.empty(); }
    double total_mass() const;

    /// Density smeared with the collapse resolution: each point mass becomes
    /// N(position, r_C^2), each blob N(center, sigma^2 + r_C^2).
    double smeared_density(const Vec3& z, double r_C) const;
};

/// Covariance value or a divergence marker (value and error are
/// meaningless when divergent is set).
struct CovarianceResult {
    double value = 0.0;
    double error = 0.0;
    bool divergent = false;
};

/// GPSL potential-noise covariance
///   (m0 G^2/gamma) int rho_smeared(z) / (|x-z| |y-z|) d^3z,
/// importance-sampled with Gaussians on the sources and Coulomb shells on
/// the two field points. Finite for every x, y including x = y; exactly
/// zero (no sampling) for an empty density. Bitwise symmetric under
/// swapping x and y.
CovarianceResult gpsl_field_covariance(const Vec3& x, const Vec3& y,
                                       const MassDensityField& field,
                                       const ModelParams& params,
                                       const QuadratureConfig& cfg);

/// DP comparator: hbar G / (2 |x - y|), independent of the density;
/// divergent at coincidence.
CovarianceResult td_dp_covariance(const Vec3& x, const Vec3& y,
                                  const ModelParams& params);

/// CSL comparator: spatially white noise — the equal-point covariance that
/// the model's formal expression assigns is a delta function, so the result
/// is flagged divergent at every separation.
CovarianceResult td_csl_covariance(const Vec3& x, const Vec3& y,
                                   const ModelParams& params, const TDParams& td);

}  // namespace gpsl
