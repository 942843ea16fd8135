#pragma once

#include <cstdint>

#include "gpsl/constants.hpp"
#include "gpsl/quadrature.hpp"
#include "gpsl/vec3.hpp"

/// Mean gravitational-feedback force between two particles: each collapse
/// event kicks every particle toward the collapse center through the
/// feedback phase, and averaging the kicks over the jump process yields a
/// Newton-like attraction with a smeared short-distance core.

namespace gpsl {

/// Two point particles with fixed positions.
struct PairConfiguration {
    double m_j = 1.0;
    double m_k = 1.0;
    Vec3 z_j{};
    Vec3 z_k{};

    void validate() const;

    /// The same pair with the roles of j and k exchanged.
    PairConfiguration swapped() const { return {m_k, m_j, z_k, z_j}; }
};

/// A mean force (or mean impulse) vector with a combined standard error,
/// the Euclidean norm of the per-component errors.
struct ForceVector {
    Vec3 components{};
    double error = 0.0;
};

/// Momentum kick per jump at displacement y from the collapse center, per
/// unit feedback strength: (y/|y|^2) [f(|y|) - 4 pi r_C^2 g(y)]. Odd in y;
/// the removable 0/0 at the origin is handled by the series branch
/// y sqrt(2/pi)/(3 r_C^3) below |y| = 1e-6 r_C.
Vec3 impulse_kernel(const Vec3& y, const ModelParams& params);

/// Dimensionless mean-force profile F_G of the reduced distance
/// d_r = d/(r_C sqrt 2): rises linearly as d_r/(3 sqrt(2 pi)) at contact
/// and falls back to the Newtonian 1/(2 d_r^2) at large separation.
/// Evaluated by adaptive quadrature on an overflow-safe combined integrand;
/// below d_r = 1e-6 the exact linear asymptote is returned.
IntegralResult f_tilde_g(double d_r, const QuadratureConfig& cfg);

/// Mean feedback force on particle k exerted by particle j:
/// (G m_j m_k F_G(d_r)/r_C^2) (z_j - z_k)/d, attraction along the
/// separation. Swapping the pair negates the result bitwise. Zero vector
/// for coincident positions.
ForceVector average_force(const PairConfiguration& pair, const ModelParams& params,
                          const QuadratureConfig& cfg);

/// Direct simulation of the same mean: sample collapse centers from the
/// pair's jump-site mixture (site weights m/M, Gaussian smear r_C) and
/// average the impulse on particle k. cfg.max_evals samples, cfg.seed
/// stream; chunked with per-chunk substreams so the result is reproducible.
/// Relation to average_force: mean force = (gamma M / m0) x mean impulse.
ForceVector mc_mean_impulse(const PairConfiguration& pair, const ModelParams& params,
                            const QuadratureConfig& cfg);

/// Sum of the impulses on both particles over the same collapse events as
/// mc_mean_impulse (same cfg => same draws): the mean must vanish, since
/// every single event conserves total momentum only on average.
ForceVector mc_mean_impulse_total(const PairConfiguration& pair, const ModelParams& params,
                                  const QuadratureConfig& cfg);

/// Mean interaction energy of a particle with a mass M whose position is
/// smeared by the collapse noise: -G m_p M E_{x ~ N(X, r_C^2 I)}[f(|x - x_p|)]
/// at separation d = |X - x_p|. Finite at contact: -G m_p M / (sqrt(pi) r_C).
IntegralResult effective_pair_potential(double d, double m_p, double M,
                                        const ModelParams& params,
                                        const QuadratureConfig& cfg);

}  // namespace gpsl
