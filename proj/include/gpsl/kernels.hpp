#pragma once

#include "gpsl/constants.hpp"
#include "gpsl/vec3.hpp"

namespace gpsl {

/// Normalized Gaussian smearing kernel (2 pi r_C^2)^{-3/2} exp(-r^2/(2 r_C^2))
/// evaluated at distance |x|; integrates to one over R^3.
double gaussian_smear(double radius, double r_C);
double gaussian_smear(const Vec3& x, double r_C);

/// Screened Coulomb kernel f(x) = erf(|x|/(r_C sqrt(2)))/|x|: the Newtonian
/// 1/r softened by the smearing Gaussian. Monotone decreasing; finite limit
/// sqrt(2/pi)/r_C at x = 0 (series branch below 1e-6 r_C avoids 0/0).
double erf_kernel_f(double radius, double r_C);

/// Gravitational feedback potential of a source of the given mass at distance
/// |q - x|: -G m0 mass f(|q - x|). Finite and attractive everywhere.
double feedback_potential(double q_minus_x, double mass, const ModelParams& params);

}  // namespace gpsl
