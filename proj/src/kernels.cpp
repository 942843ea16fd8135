#include "gpsl/kernels.hpp"

#include <cmath>

#include "gpsl/errors.hpp"
#include "gpsl/special.hpp"

namespace gpsl {

namespace {
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
}

double gaussian_smear(double radius, double r_C) {
    if (!(r_C > 0.0)) throw DomainError("gaussian_smear: r_C must be > 0");
    if (!std::isfinite(radius)) throw DomainError("gaussian_smear: non-finite input");
    const double s2 = r_C * r_C;
    return std::exp(-0.5 * radius * radius / s2) / std::pow(2.0 * M_PI * s2, 1.5);
}

double gaussian_smear(const Vec3& x, double r_C) {
    if (!std::isfinite(x.x) || !std::isfinite(x.y) || !std::isfinite(x.z))
        throw DomainError("gaussian_smear: non-finite input");
    return gaussian_smear(x.norm(), r_C);
}

double erf_kernel_f(double radius, double r_C) {
    if (!(r_C > 0.0)) throw DomainError("erf_kernel_f: r_C must be > 0");
    if (!std::isfinite(radius) || radius < 0.0)
        throw DomainError("erf_kernel_f: radius must be finite and >= 0");
    if (radius < 1e-6 * r_C) {
        // Second-order series of erf(u)/u at u = r/(r_C sqrt 2): relative
        // truncation error below 1e-25 at the switch point.
        const double u2 = 0.5 * radius * radius / (r_C * r_C);
        return kSqrt2OverPi / r_C * (1.0 - u2 / 3.0);
    }
    return erf(radius / (r_C * std::sqrt(2.0))) / radius;
}

double feedback_potential(double q_minus_x, double mass, const ModelParams& params) {
    params.validate();
    return -params.constants.G * params.constants.m0 * mass *
           erf_kernel_f(q_minus_x, params.r_C);
}

}  // namespace gpsl
