#pragma once

#include "gpsl/constants.hpp"
#include "gpsl/quadrature.hpp"
#include "gpsl/single_particle.hpp"

/// Decoherence of a homogeneous rigid sphere in a superposition of two
/// center positions, in the sharp-wall regime R >> r_C. All kernels are
/// dimensionless functions of x = D/(2R) (D the center separation) except
/// f_sp, whose argument is s/R.

namespace gpsl {

/// Homogeneous sphere: total mass M and radius R.
struct SphereSpec {
    double M = 1.0;  ///< kg (or unit-free mass)
    double R = 1.0;  ///< m (or unit-free length)

    void validate() const;

    /// Sphere built from a homogeneous density mu0.
    static SphereSpec from_density(double mu0, double R);

    /// Homogeneous density 3M/(4 pi R^3).
    double density() const;

    /// Gravitational length scale r_M = G m0 M / (gamma hbar) of the sphere,
    /// the collective analogue of the single-particle r_p.
    double r_m(const ModelParams& params) const;
};

/// Overlap kernel: fraction of one ball covered by the other,
/// 1 - (3/2)x + x^3/2 for x <= 1, zero beyond.
double k_c(double x);

/// Gravitational kernel of the GPSL sphere rate (closed arccos form).
double k_g_gpsl(double x);

/// Gravitational kernel of the DP sphere rate; continuous across x = 1 with
/// k_g_dp(1) = (pi^{3/2}/(2 sqrt 2)) (7/5).
double k_g_dp(double x);

/// Gravitational kernel of the CSL sphere rate; continuous across x = 1 with
/// k_g_csl(1) = 41 pi / 70.
double k_g_csl(double x);

/// Shape of the sphere-smeared interaction potential: the full potential is
/// f_bar(s) = (3 pi / R) f_sp(s/R), with f_bar(0) = 3/(2R) and 1/s far field.
double f_sp(double x);

/// Potential of a homogeneous unit ball of unit total mass:
/// 3/2 - s^2/2 inside, 1/s outside. Equals 3 pi f_sp(s); this is the shape
/// all the defining-integral oracles below are built from.
double ball_potential(double s);

/// Same potential evaluated by direct 1D quadrature of the shell integral
/// 3 int_0^1 r^2 / max(r, s) dr — an independent construction used to
/// anchor the closed form.
double ball_potential_quadrature(double s);

/// Fourier transform of the normalized sphere indicator:
/// sqrt(2/pi) k^-3 [sin(kR) - kR cos(kR)], with a series branch for
/// kR < 1e-3 protecting the removable k -> 0 limit chi_tilde -> sqrt(2/pi) R^3/3.
double chi_tilde(double k, double R);

// ---------------------------------------------------------------------------
// Sphere decoherence rates (closed forms, sharp-wall regime).
// All three enforce R >= 20 r_C; below that the sharp-wall kernels are not a
// faithful description and the call is rejected with ValidityError.
// ---------------------------------------------------------------------------

/// GPSL sphere rate: gamma (M/m0) [1 - k_c + (r_M/R)^2 k_g_gpsl] at x = D/(2R).
DecoherencePoint gamma_sphere_gpsl(double D, const SphereSpec& sphere,
                                   const ModelParams& params);

/// DP sphere rate: 2 (G M^2 / (hbar R)) k_g_dp at x = D/(2R).
DecoherencePoint gamma_sphere_dp(double D, const SphereSpec& sphere,
                                 const ModelParams& params);

/// CSL sphere rate: collapse term (3 gamma_csl/(4 pi R^3)) (M/m0)^2 [1 - k_c]
/// plus gravitational term (R/gamma_csl) (G M m0/hbar)^2 k_g_csl.
DecoherencePoint gamma_sphere_csl(double D, const SphereSpec& sphere,
                                  const ModelParams& params, const TDParams& td);

/// Radius at which the GPSL collapse and gravitational contributions balance
/// for a homogeneous sphere of density mu0: sqrt(3 gamma hbar/(4 pi G m0 mu0)).
double balance_radius(double mu0, const ModelParams& params);

// ---------------------------------------------------------------------------
// Defining-integral oracles (unit ball geometry, centers at -+x on the z
// axis so the kernel argument is exactly x). These sample the integrals the
// closed forms are meant to equal and are what the validation suite trusts.
// ---------------------------------------------------------------------------

/// Overlap fraction E_{z ~ ball X}[z in ball Y]; equals k_c(x).
IntegralResult k_c_mc(double x, const QuadratureConfig& cfg);

/// (1/2) E_{z ~ ball X}[chi_Y (Delta F)^2] with F the unit-ball potential:
/// the defining lens integral of the GPSL gravitational kernel.
IntegralResult k_g_gpsl_mc(double x, const QuadratureConfig& cfg);

/// (1/2) E_{z ~ ball X}[Delta F]: the defining integral of the DP kernel
/// (difference of gravitational self-energies, sphere units).
IntegralResult k_g_dp_mc(double x, const QuadratureConfig& cfg);

/// (1/8) int_{R^3} (Delta F)^2 d^3z via importance sampling with Coulomb
/// shells at both centers: the defining integral of the CSL kernel.
IntegralResult k_g_csl_mc(double x, const QuadratureConfig& cfg);

/// Mean of sin(Delta F) over ball X, points outside the lens contributing
/// zero: the imaginary (unitary) part of the jump kernel for the sphere.
/// Delta F is antisymmetric under reflection through the midplane while the
/// lens is symmetric, so the exact value is zero at every separation;
/// returns the MC estimate with its standard error (exact zero when the
/// lens is empty, x >= 1, or the balls coincide, x = 0).
IntegralResult unitary_term_sphere_check(double x, const QuadratureConfig& cfg);

}  // namespace gpsl
