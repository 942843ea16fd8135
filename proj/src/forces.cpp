#include "gpsl/forces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gpsl/errors.hpp"
#include "gpsl/kernels.hpp"
#include "gpsl/rng.hpp"
#include "gpsl/special.hpp"

namespace gpsl {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrt2Pi = 2.5066282746310005024;
constexpr double kSqrt2OverPi = 0.79788456080286535588;
}  // namespace

void PairConfiguration::validate() const {
    if (!(m_j > 0.0) || !(m_k > 0.0))
        throw ConfigError("PairConfiguration: masses must be > 0");
}

Vec3 impulse_kernel(const Vec3& y, const ModelParams& params) {
    params.validate();
    const double r_C = params.r_C;
    const double r = y.norm();
    if (r < 1e-6 * r_C) {
        // Leading term of (f - 4 pi r_C^2 g)/r^2: both pieces start at
        // sqrt(2/pi)/r_C and differ first at O(r^2).
        return y * (kSqrt2OverPi / (3.0 * r_C * r_C * r_C));
    }
    const double bracket =
        erf_kernel_f(r, r_C) - 4.0 * M_PI * r_C * r_C * gaussian_smear(r, r_C);
    return y * (bracket / (r * r));
}

IntegralResult f_tilde_g(double d_r, const QuadratureConfig& cfg) {
    if (!(d_r >= 0.0)) throw DomainError("f_tilde_g: d_r must be >= 0");
    if (d_r < 1e-6) {
        // Exact linear asymptote; the quadrature form below is 0/0-unstable
        // here and the curvature correction is O(d_r^3).
        return {d_r / (3.0 * kSqrt2Pi), 0.0, 0, true};
    }

    // Radial integrand with the Gaussian prefactor folded into shifted
    // exponentials e^{-(r -+ d_r)^2}: every exponent is <= 0, so arbitrarily
    // large d_r cannot overflow. The a -> 0 cancellation in the odd bracket
    // 2[a cosh a - sinh a] (a = 2 d_r r) is handled by its series.
    const auto integrand = [d_r](double r) {
        if (r <= 0.0) return 0.0;
        const double a = 2.0 * d_r * r;
        double odd_bracket;  // e^{-(r+d)^2}(1+a) - e^{-(r-d)^2}(1-a)
        if (a < 0.1) {
            const double a2 = a * a;
            odd_bracket = std::exp(-r * r - d_r * d_r) * a * a2 *
                          (2.0 / 3.0 + a2 * (1.0 / 15.0 + a2 / 420.0));
        } else {
            const double rp = r + d_r, rm = r - d_r;
            odd_bracket = std::exp(-rp * rp) * (1.0 + a) - std::exp(-rm * rm) * (1.0 - a);
        }
        double screened;  // (sqrt(pi)/r) erf(r) - 2 e^{-r^2}
        if (r < 1e-3) {
            const double r2 = r * r;
            screened = 4.0 / 3.0 * r2 * (1.0 - 0.6 * r2);
        } else {
            screened = kSqrtPi / r * erf(r) - 2.0 * std::exp(-r * r);
        }
        return odd_bracket * screened / r;
    };

    IntegralResult out;
    if (d_r <= 8.0) {
        out = integrate_1d(integrand, 0.0, std::numeric_limits<double>::infinity(), cfg);
    } else {
        // The mass of the integrand sits in a bump of width ~1 centered at
        // r = d_r; an adaptive scan of [0, inf) can step over it entirely at
        // large d_r. Bracket the bump and integrate the three pieces.
        const IntegralResult head = integrate_1d(integrand, 0.0, d_r - 8.0, cfg);
        const IntegralResult core = integrate_1d(integrand, d_r - 8.0, d_r + 8.0, cfg);
        const IntegralResult tail = integrate_1d(
            integrand, d_r + 8.0, std::numeric_limits<double>::infinity(), cfg);
        out.value = head.value + core.value + tail.value;
        out.error_estimate =
            head.error_estimate + core.error_estimate + tail.error_estimate;
        out.n_evals = head.n_evals + core.n_evals + tail.n_evals;
        out.converged = head.converged && core.converged && tail.converged;
    }
    const double scale = 1.0 / (4.0 * M_PI * d_r * d_r);
    out.value *= scale;
    out.error_estimate *= scale;
    return out;
}

ForceVector average_force(const PairConfiguration& pair, const ModelParams& params,
                          const QuadratureConfig& cfg) {
    pair.validate();
    params.validate();
    const Vec3 sep = pair.z_j - pair.z_k;
    const double d = sep.norm();
    if (d == 0.0) return {};

    const double r_C = params.r_C;
    const IntegralResult fg = f_tilde_g(d / (r_C * std::sqrt(2.0)), cfg);
    const double scale = params.constants.G * pair.m_j * pair.m_k / (r_C * r_C * d);
    ForceVector out;
    out.components = sep * (scale * fg.value);
    out.error = scale * fg.error_estimate * d;  // |sep| * scalar error
    return out;
}

namespace {

/// Deterministic chunked mean of a per-event vector over the pair's
/// collapse-center distribution. Event t in chunk c uses substream(seed, c),
/// so the draw sequence is independent of how the loop is scheduled.
template <class EventVec>
ForceVector chunked_mean(const PairConfiguration& pair, const ModelParams& params,
                         const QuadratureConfig& cfg, EventVec&& event) {
    constexpr std::uint64_t kChunk = 1024;
    const std::uint64_t n = cfg.max_evals;
    if (n == 0) throw ConfigError("mc_mean_impulse: max_evals must be > 0");
    const std::uint64_t n_chunks = (n + kChunk - 1) / kChunk;
    const double mass_total = pair.m_j + pair.m_k;
    const double p_j = pair.m_j / mass_total;

    std::vector<double> sum[3], sum2[3];
    for (int c = 0; c < 3; ++c) {
        sum[c].assign(n_chunks, 0.0);
        sum2[c].assign(n_chunks, 0.0);
    }

    for (std::uint64_t chunk = 0; chunk < n_chunks; ++chunk) {
        Xoshiro256 rng = substream(cfg.seed, chunk);
        const std::uint64_t lo = chunk * kChunk;
        const std::uint64_t hi = std::min(n, lo + kChunk);
        for (std::uint64_t t = lo; t < hi; ++t) {
            const Vec3 site = rng.uniform() < p_j ? pair.z_j : pair.z_k;
            const Vec3 x_c =
                site + Vec3{rng.normal(), rng.normal(), rng.normal()} * params.r_C;
            const Vec3 v = event(x_c);
            sum[0][chunk] += v.x;
            sum[1][chunk] += v.y;
            sum[2][chunk] += v.z;
            sum2[0][chunk] += v.x * v.x;
            sum2[1][chunk] += v.y * v.y;
            sum2[2][chunk] += v.z * v.z;
        }
    }

    ForceVector out;
    double err2 = 0.0;
    double mean[3];
    for (int c = 0; c < 3; ++c) {
        const double s = pairwise_sum(sum[c]);
        const double s2 = pairwise_sum(sum2[c]);
        mean[c] = s / static_cast<double>(n);
        const double var =
            std::max(0.0, (s2 / static_cast<double>(n) - mean[c] * mean[c])) /
            static_cast<double>(n > 1 ? n - 1 : 1);
        err2 += var;
    }
    out.components = {mean[0], mean[1], mean[2]};
    out.error = std::sqrt(err2);
    return out;
}

}  // namespace

ForceVector mc_mean_impulse(const PairConfiguration& pair, const ModelParams& params,
                            const QuadratureConfig& cfg) {
    pair.validate();
    params.validate();
    const double strength =
        params.constants.G * params.constants.m0 * pair.m_k / params.gamma;
    return chunked_mean(pair, params, cfg, [&](const Vec3& x_c) {
        return impulse_kernel(x_c - pair.z_k, params) * strength;
    });
}

ForceVector mc_mean_impulse_total(const PairConfiguration& pair, const ModelParams& params,
                                  const QuadratureConfig& cfg) {
    pair.validate();
    params.validate();
    const double unit = params.constants.G * params.constants.m0 / params.gamma;
    return chunked_mean(pair, params, cfg, [&](const Vec3& x_c) {
        return impulse_kernel(x_c - pair.z_j, params) * (unit * pair.m_j) +
               impulse_kernel(x_c - pair.z_k, params) * (unit * pair.m_k);
    });
}

IntegralResult effective_pair_potential(double d, double m_p, double M,
                                        const ModelParams& params,
                                        const QuadratureConfig& cfg) {
    params.validate();
    if (!(d >= 0.0)) throw DomainError("effective_pair_potential: d must be >= 0");
    if (!(m_p > 0.0) || !(M > 0.0))
        throw DomainError("effective_pair_potential: masses must be > 0");

    const double r_C = params.r_C;
    const Vec3 particle{0.0, 0.0, d};
    GaussianMap3 gauss{Vec3{}, r_C};
    IntegralResult out = stratified_mc(3, cfg, [&](const double* u) {
        const Vec3 x = gauss.map(u);
        return erf_kernel_f((x - particle).norm(), r_C);
    });
    const double scale = -params.constants.G * m_p * M;
    out.value *= scale;
    out.error_estimate *= std::abs(scale);
    return out;
}

}  // namespace gpsl
