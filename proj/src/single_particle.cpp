#include "gpsl/single_particle.hpp"

#include <cmath>
#include <limits>

#include "gpsl/errors.hpp"
#include "gpsl/kernels.hpp"
#include "gpsl/special.hpp"

namespace gpsl {

const char* model_name(Model m) {
    switch (m) {
        case Model::GPSL_exact: return "GPSL_exact";
        case Model::GPSL_perturbative: return "GPSL_perturbative";
        case Model::TD_CSL: return "TD_CSL";
        case Model::TD_DP: return "TD_DP";
    }
    return "unknown";
}

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kPi5 = 306.01968478528145326;  // pi^5

/// Importance-sampled integrand of F on the unit 4-cube. Angles are uniform
/// on [0, pi]; radii are half-normal with density (2/sqrt(pi)) e^{-k^2}. The
/// weight folds e^{-A} I0(B) into e^{B-A} i0e(B) with
/// B - A + k^2 + v^2 = k v cos(theta_k - theta_v), which is bounded by k v,
/// so the factor stays finite for every draw the 53-bit sampler can produce.
double f_tilde_mc_integrand(double d, const double* u) {
    const double tk = M_PI * u[0];
    const double tv = M_PI * u[1];
    const double k = inv_normal_cdf(0.5 * (1.0 + u[2])) * M_SQRT1_2;
    const double v = inv_normal_cdf(0.5 * (1.0 + u[3])) * M_SQRT1_2;
    const double sk = std::sin(tk), ck = std::cos(tk);
    const double sv = std::sin(tv), cv = std::cos(tv);
    const double b = k * v * sk * sv;
    return kPi5 * std::exp(k * v * std::cos(tk - tv)) * bessel_i0e(b) * sk * sv *
           std::sin(d * k * ck) * std::sin(d * v * cv);
}

/// Tensor Gauss-Legendre sum for F: radial axes truncated at k = 8 (the
/// integrand carries e^{-k^2}, so the cut is below 1e-27), angular axes on
/// [0, pi]. The scaled-Bessel exponent k v cos(t_k - t_v) - k^2 - v^2 is
/// always <= 0, so no term can overflow.
double f_tilde_tensor(double d, int n_radial, int n_angular) {
    constexpr double k_cut = 8.0;
    const GaussRule& rad = gauss_legendre(n_radial);
    const GaussRule& ang = gauss_legendre(n_angular);

    struct AxisNode {
        double r;      // radial value
        double sin_t;  // sin(theta)
        double cos_t;  // cos(theta)
        double theta;
        double a;      // combined weight * sin(theta) * sin(d r cos(theta))
    };
    std::vector<AxisNode> nodes;
    nodes.reserve(static_cast<std::size_t>(n_radial) * n_angular);
    for (int i = 0; i < n_radial; ++i) {
        const double r = 0.5 * k_cut * (rad.nodes[static_cast<std::size_t>(i)] + 1.0);
        const double wr = 0.5 * k_cut * rad.weights[static_cast<std::size_t>(i)];
        for (int t = 0; t < n_angular; ++t) {
            const double theta = 0.5 * M_PI * (ang.nodes[static_cast<std::size_t>(t)] + 1.0);
            const double wt = 0.5 * M_PI * ang.weights[static_cast<std::size_t>(t)];
            AxisNode n;
            n.r = r;
            n.theta = theta;
            n.sin_t = std::sin(theta);
            n.cos_t = std::cos(theta);
            n.a = wr * wt * n.sin_t * std::sin(d * r * n.cos_t);
            nodes.push_back(n);
        }
    }

    // The kernel is symmetric in the two (radius, angle) pairs: sum ordered
    // pairs once and double, plus the diagonal.
    const std::size_t n = nodes.size();
    double sum = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const AxisNode& np = nodes[p];
        double row = 0.0;
        for (std::size_t q = 0; q < p; ++q) {
            const AxisNode& nq = nodes[q];
            const double rr = np.r * nq.r;
            const double kernel = std::exp(rr * std::cos(np.theta - nq.theta) - np.r * np.r -
                                           nq.r * nq.r) *
                                  bessel_i0e(rr * np.sin_t * nq.sin_t);
            row += nq.a * kernel;
        }
        const double diag = std::exp(np.r * np.r * (1.0 - 2.0)) *
                            bessel_i0e(np.r * np.r * np.sin_t * np.sin_t) * np.a;
        sum += np.a * (2.0 * row + diag);
    }
    return 4.0 * M_PI * M_PI * sum;
}

}  // namespace

IntegralResult f_tilde_mc(double d_tilde, const QuadratureConfig& cfg) {
    if (!(d_tilde >= 0.0)) throw DomainError("f_tilde: d_tilde must be >= 0");
    if (d_tilde == 0.0) return {0.0, 0.0, 0, true};
    return stratified_mc(4, cfg,
                         [d_tilde](const double* u) { return f_tilde_mc_integrand(d_tilde, u); });
}

IntegralResult f_tilde_quadrature(double d_tilde, int n_radial, int n_angular) {
    if (!(d_tilde >= 0.0)) throw DomainError("f_tilde: d_tilde must be >= 0");
    if (d_tilde == 0.0) return {0.0, 0.0, 0, true};
    const double fine = f_tilde_tensor(d_tilde, n_radial, n_angular);
    const double coarse = f_tilde_tensor(d_tilde, 2 * n_radial / 3, 2 * n_angular / 3);
    IntegralResult out;
    out.value = fine;
    out.error_estimate = std::abs(fine - coarse);
    const std::uint64_t fine_n = static_cast<std::uint64_t>(n_radial) * n_angular;
    const std::uint64_t coarse_n =
        static_cast<std::uint64_t>(2 * n_radial / 3) * (2 * n_angular / 3);
    out.n_evals = fine_n * fine_n + coarse_n * coarse_n;
    out.converged = true;
    return out;
}

IntegralResult f_tilde(double d_tilde, const QuadratureConfig& cfg) {
    if (cfg.strategy == QuadratureConfig::Strategy::adaptive_1d)
        return f_tilde_quadrature(d_tilde);
    return f_tilde_mc(d_tilde, cfg);
}

// ---------------------------------------------------------------------------
// FtildeTable
// ---------------------------------------------------------------------------

FtildeTable::FtildeTable(double d_max, double step, int n_radial, int n_angular) {
    step_ = step;
    const int n = static_cast<int>(std::round(d_max / step)) + 1;
    grid_.resize(static_cast<std::size_t>(n));
    values_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        grid_[static_cast<std::size_t>(i)] = i * step;
        values_[static_cast<std::size_t>(i)] =
            (i == 0) ? 0.0 : f_tilde_tensor(i * step, n_radial, n_angular);
    }

    // Natural cubic spline second derivatives (tridiagonal solve).
    const std::size_t m = grid_.size();
    second_derivs_.assign(m, 0.0);
    std::vector<double> tmp(m, 0.0);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double sig = 0.5;
        const double p = sig * second_derivs_[i - 1] + 2.0;
        second_derivs_[i] = (sig - 1.0) / p;
        const double dd = (values_[i + 1] - 2.0 * values_[i] + values_[i - 1]) / step_;
        tmp[i] = (3.0 * dd / step_ - sig * tmp[i - 1]) / p;
    }
    second_derivs_[m - 1] = 0.0;
    for (std::size_t i = m - 1; i-- > 0;)
        second_derivs_[i] = second_derivs_[i] * second_derivs_[i + 1] + tmp[i];

    // Exponential tail extension calibrated on the last grid segment.
    const double f_last = values_[m - 1];
    const double f_prev = values_[m - 2];
    tail_decay_ = (f_last > 0.0 && f_prev > f_last)
                      ? step_ / std::log(f_prev / f_last)
                      : 1.0;
}

double FtildeTable::operator()(double d_tilde) const {
    if (!(d_tilde >= 0.0)) throw DomainError("FtildeTable: d_tilde must be >= 0");
    const double d_max = grid_.back();
    if (d_tilde >= d_max)
        return values_.back() * std::exp(-(d_tilde - d_max) / tail_decay_);
    const std::size_t i = std::min(
        grid_.size() - 2, static_cast<std::size_t>(std::floor(d_tilde / step_)));
    const double a = (grid_[i + 1] - d_tilde) / step_;
    const double b = 1.0 - a;
    return a * values_[i] + b * values_[i + 1] +
           ((a * a * a - a) * second_derivs_[i] + (b * b * b - b) * second_derivs_[i + 1]) *
               step_ * step_ / 6.0;
}

const FtildeTable& FtildeTable::standard() {
    static const FtildeTable table(6.0, 0.05, 32, 24);
    return table;
}

// ---------------------------------------------------------------------------
// Decoherence rates
// ---------------------------------------------------------------------------

DecoherencePoint gamma_gpsl_exact(double d_tilde, const ParticleSpec& particle,
                                  const ModelParams& params, const QuadratureConfig& cfg) {
    params.validate();
    particle.validate();
    if (!(d_tilde >= 0.0)) throw DomainError("gamma_gpsl_exact: d_tilde must be >= 0");

    DecoherencePoint out;
    out.d_tilde = d_tilde;
    out.model = Model::GPSL_exact;
    const double r_p = particle.r_p(params);
    out.validity_warning = r_p > 0.1 * params.r_C;

    const double prefactor = params.gamma * particle.mass / params.constants.m0;
    if (d_tilde == 0.0) return out;  // coincident branches never decohere

    const double overlap = std::exp(-0.5 * d_tilde * d_tilde);
    if (overlap < 1e-300) {
        // The Gaussian branch overlap has underflowed: the rate is the
        // plateau exactly, no sampling required.
        out.rate = prefactor;
        return out;
    }

    // E over z ~ N(midpoint, r_C^2 I) of cos(r_p [f(z - x) - f(z - y)]):
    // this is the normalized sqrt(g g) weight in closed form, so a single
    // Gaussian map gives a zero-variance estimator at r_p = 0.
    const double r_C = params.r_C;
    const Vec3 x{0.0, 0.0, +r_C * d_tilde};
    const Vec3 y{0.0, 0.0, -r_C * d_tilde};
    GaussianMap3 gauss{Vec3{}, r_C};
    const IntegralResult avg = stratified_mc(3, cfg, [&](const double* u) {
        const Vec3 z = gauss.map(u);
        const double df = erf_kernel_f((z - x).norm(), r_C) - erf_kernel_f((z - y).norm(), r_C);
        return std::cos(r_p * df);
    });

    out.rate = prefactor * (1.0 - overlap * avg.value);
    out.error = prefactor * overlap * avg.error_estimate;
    out.converged = avg.converged;
    return out;
}

namespace {

double perturbative_rate(double d_tilde, double f_value, const ParticleSpec& particle,
                         const ModelParams& params) {
    const double r_p = particle.r_p(params);
    const double ratio2 = (r_p / params.r_C) * (r_p / params.r_C);
    const double overlap = std::exp(-0.5 * d_tilde * d_tilde);
    const double pi4 = M_PI * M_PI * M_PI * M_PI;
    return params.gamma * particle.mass / params.constants.m0 *
           (1.0 - overlap + ratio2 * overlap / (2.0 * pi4) * f_value);
}

void check_perturbative_validity(const ParticleSpec& particle, const ModelParams& params) {
    const double r_p = particle.r_p(params);
    if (r_p > 0.1 * params.r_C * (1.0 + 1e-12))
        throw ValidityError(
            "gamma_gpsl_perturbative: expansion trust region r_p <= 0.1 r_C exceeded "
            "(r_p/r_C = " +
            std::to_string(r_p / params.r_C) + "); use gamma_gpsl_exact instead");
}

}  // namespace

DecoherencePoint gamma_gpsl_perturbative(double d_tilde, const ParticleSpec& particle,
                                         const ModelParams& params) {
    params.validate();
    particle.validate();
    if (!(d_tilde >= 0.0)) throw DomainError("gamma_gpsl_perturbative: d_tilde must be >= 0");
    check_perturbative_validity(particle, params);
    DecoherencePoint out;
    out.d_tilde = d_tilde;
    out.model = Model::GPSL_perturbative;
    out.rate = perturbative_rate(d_tilde, FtildeTable::standard()(d_tilde), particle, params);
    return out;
}

DecoherencePoint gamma_gpsl_perturbative_direct(double d_tilde, const ParticleSpec& particle,
                                                const ModelParams& params,
                                                const QuadratureConfig& cfg) {
    params.validate();
    particle.validate();
    if (!(d_tilde >= 0.0)) throw DomainError("gamma_gpsl_perturbative: d_tilde must be >= 0");
    check_perturbative_validity(particle, params);
    const IntegralResult f = f_tilde(d_tilde, cfg);
    DecoherencePoint out;
    out.d_tilde = d_tilde;
    out.model = Model::GPSL_perturbative;
    out.rate = perturbative_rate(d_tilde, f.value, particle, params);
    const double r_p = particle.r_p(params);
    const double ratio2 = (r_p / params.r_C) * (r_p / params.r_C);
    const double pi4 = M_PI * M_PI * M_PI * M_PI;
    out.error = params.gamma * particle.mass / params.constants.m0 * ratio2 *
                std::exp(-0.5 * d_tilde * d_tilde) / (2.0 * pi4) * f.error_estimate;
    out.converged = f.converged;
    return out;
}

DecoherencePoint gamma_td_dp(double d_tilde, const ParticleSpec& particle,
                             const ModelParams& params) {
    params.validate();
    particle.validate();
    if (!(d_tilde >= 0.0)) throw DomainError("gamma_td_dp: d_tilde must be >= 0");
    const double pref = gamma_td_dp_limit(particle, params);
    DecoherencePoint out;
    out.d_tilde = d_tilde;
    out.model = Model::TD_DP;
    const double d2 = d_tilde * d_tilde;
    if (d_tilde < 1e-4) {
        // Series of 1 - (sqrt(pi)/(2d)) erf(d): removable 0/0 at d = 0.
        out.rate = pref * d2 * (1.0 / 3.0 + d2 * (-0.1 + d2 / 42.0));
    } else {
        out.rate = pref * (1.0 - 0.5 * kSqrtPi / d_tilde * erf(d_tilde));
    }
    return out;
}

DecoherencePoint gamma_td_csl(double d_tilde, const ParticleSpec& particle,
                              const ModelParams& params, const TDParams& td) {
    params.validate();
    particle.validate();
    td.validate();
    if (!(d_tilde >= 0.0)) throw DomainError("gamma_td_csl: d_tilde must be >= 0");
    const double d2 = d_tilde * d_tilde;
    const PhysicalConstants& c = params.constants;
    const double mass_ratio = particle.mass / c.m0;

    const double collapse = td.gamma_csl *
                            std::pow(4.0 * M_PI * params.r_C * params.r_C, -1.5) * mass_ratio *
                            mass_ratio * (1.0 - std::exp(-d2));

    double bracket;
    if (d_tilde < 1e-4) {
        // Series around the removable 1/(2d) singularity, through d^6.
        bracket = (d2 * (2.0 / 3.0) + d2 * d2 * (-1.0 / 15.0) + d2 * d2 * d2 / 105.0) / kSqrtPi;
    } else {
        bracket = (d_tilde + 0.5 / d_tilde) * erf(d_tilde) -
                  (2.0 - std::exp(-d2)) / kSqrtPi;
    }
    const double grav_pref = M_PI * params.r_C / td.gamma_csl * c.m0 * c.m0 * particle.mass *
                             particle.mass * c.G * c.G / (c.hbar * c.hbar);

    DecoherencePoint out;
    out.d_tilde = d_tilde;
    out.model = Model::TD_CSL;
    out.rate = collapse + grav_pref * bracket;
    return out;
}

double gamma_gpsl_limit(const ParticleSpec& particle, const ModelParams& params) {
    return params.gamma * particle.mass / params.constants.m0;
}

double gamma_td_dp_limit(const ParticleSpec& particle, const ModelParams& params) {
    const PhysicalConstants& c = params.constants;
    return 2.0 * std::sqrt(2.0) * M_PI * c.G * particle.mass * particle.mass /
           (c.hbar * params.r_C);
}

double crossover_mass(const ModelParams& params) {
    const PhysicalConstants& c = params.constants;
    return params.gamma * c.hbar * params.r_C / (2.0 * std::sqrt(2.0) * M_PI * c.G * c.m0);
}

IntegralResult self_interaction_null_check(double d_tilde, const QuadratureConfig& cfg) {
    if (!(d_tilde >= 0.0))
        throw DomainError("self_interaction_null_check: d_tilde must be >= 0");
    if (d_tilde == 0.0) return {0.0, 0.0, 0, true};

    // Difference of the two screened-Coulomb averages around each branch,
    // taken under the common normalized sqrt(g g) weight (a normal law at the
    // midpoint). Reflection through the midpoint plane swaps the branches, so
    // the exact value is zero; the estimator uses common samples.
    const double overlap = std::exp(-0.5 * d_tilde * d_tilde);
    const Vec3 x{0.0, 0.0, +d_tilde};
    const Vec3 y{0.0, 0.0, -d_tilde};
    GaussianMap3 gauss{Vec3{}, 1.0};
    return stratified_mc(3, cfg, [&](const double* u) {
        const Vec3 z = gauss.map(u);
        return overlap * (erf_kernel_f((z - x).norm(), 1.0) - erf_kernel_f((z - y).norm(), 1.0));
    });
}

/// Replaces non-positive entries (exact points, e.g. from deterministic
/// quadrature whose embedded error estimate collapsed to zero) by the
/// smallest positive sigma present, or 1 if every entry is non-positive, so
/// inverse-variance weights stay finite.
static std::vector<double> usable_sigmas(const std::vector<double>& sigma) {
    double floor_value = std::numeric_limits<double>::infinity();
    for (double s : sigma)
        if (s > 0.0) floor_value = std::min(floor_value, s);
    if (!std::isfinite(floor_value)) floor_value = 1.0;
    std::vector<double> out(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i)
        out[i] = sigma[i] > 0.0 ? sigma[i] : floor_value;
    return out;
}

QuadraticFit fit_quadratic_coefficient(const std::vector<double>& d,
                                       const std::vector<double>& value,
                                       const std::vector<double>& sigma) {
    if (d.size() != value.size() || d.size() != sigma.size() || d.empty())
        throw DomainError("fit_quadratic_coefficient: mismatched or empty inputs");
    const std::vector<double> sig = usable_sigmas(sigma);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double w = 1.0 / (sig[i] * sig[i]);
        const double d2 = d[i] * d[i];
        num += w * value[i] * d2;
        den += w * d2 * d2;
    }
    if (!(den > 0.0)) throw DomainError("fit_quadratic_coefficient: degenerate design");
    return {num / den, std::sqrt(1.0 / den)};
}

LogLinearFit fit_log_linear(const std::vector<double>& d, const std::vector<double>& value,
                            const std::vector<double>& sigma) {
    if (d.size() != value.size() || d.size() != sigma.size() || d.size() < 2)
        throw DomainError("fit_log_linear: need at least two points");
    const std::vector<double> sig = usable_sigmas(sigma);
    double s = 0.0, sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(value[i] > 0.0))
            throw DomainError("fit_log_linear: values must be positive for a log fit");
        const double sig_log = sig[i] / value[i];
        const double w = 1.0 / (sig_log * sig_log);
        const double yl = std::log(value[i]);
        s += w;
        sx += w * d[i];
        sxx += w * d[i] * d[i];
        sy += w * yl;
        sxy += w * d[i] * yl;
    }
    const double det = s * sxx - sx * sx;
    if (!(det > 0.0)) throw DomainError("fit_log_linear: degenerate design");
    LogLinearFit out;
    out.slope = (s * sxy - sx * sy) / det;
    out.intercept = (sxx * sy - sx * sxy) / det;
    out.slope_std_error = std::sqrt(s / det);
    return out;
}

}  // namespace gpsl
