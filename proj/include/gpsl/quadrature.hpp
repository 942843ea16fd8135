#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "gpsl/errors.hpp"
#include "gpsl/rng.hpp"
#include "gpsl/special.hpp"
#include "gpsl/vec3.hpp"

namespace gpsl {

/// Tolerances, budget, seed, and strategy for one integral evaluation.
struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::uint64_t max_evals = 2'000'000;  ///< sample budget for MC, eval cap for adaptive
    std::uint64_t seed = 1;
    enum class Strategy { adaptive_1d, plain_mc, stratified_mc };
    Strategy strategy = Strategy::stratified_mc;
    int threads = 1;  ///< worker count; never affects the result, only wall time

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw ConfigError("QuadratureConfig: tolerances must be > 0");
        if (max_evals == 0) throw ConfigError("QuadratureConfig: max_evals must be > 0");
    }
};

/// Value with an error estimate and bookkeeping. For MC strategies the error
/// estimate is the standard error of the stratified mean; converged means the
/// estimate met max(abs_tol, rel_tol * |value|).
struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::uint64_t n_evals = 0;
    bool converged = false;
};

/// Deterministic adaptive 1D integration (embedded Gauss pair, bisection of
/// the worst interval first). b may be +infinity; the tail is mapped to a
/// finite interval, which is safe for integrands with decaying envelopes.
IntegralResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                            const QuadratureConfig& cfg);

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1], computed
/// in-repo by Newton iteration on the Legendre recurrence (deterministic,
/// ~1e-15 node accuracy). Cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

/// Sum of a vector by recursive pairwise reduction in fixed order: the same
/// bits regardless of how the addends were produced, and far less rounding
/// drift than a running sum.
double pairwise_sum(const double* data, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

namespace detail {

/// Per-axis stratum count: aim for >= 64 samples per stratum, cap the total
/// grid, never below one stratum per axis.
int strata_per_axis(int dim, std::uint64_t n_total);

struct StratumAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t bad = 0;
};

}  // namespace detail

/// Stratified Monte Carlo over the unit cube [0,1)^dim, 2 <= dim <= 6.
///
/// The cube is cut into S^dim congruent strata; stratum j draws its samples
/// from the substream keyed (seed, j), deposits its partial sums at index j,
/// and the reduction runs in fixed pairwise order. Worker threads pull
/// stratum indices from an atomic counter, so scheduling affects only who
/// computes a stratum — results are bit-identical across runs and worker
/// counts. The callable sees u in (0,1)^dim (strictly inside, so inverse-CDF
/// maps are safe) and must be pure and reentrant.
template <class F>
IntegralResult stratified_mc(int dim, const QuadratureConfig& cfg, F&& f) {
    cfg.validate();
    if (dim < 2 || dim > 6)
        throw ConfigError("stratified_mc: dimension must be in [2, 6]");

    const int S = (cfg.strategy == QuadratureConfig::Strategy::plain_mc)
                      ? 1
                      : detail::strata_per_axis(dim, cfg.max_evals);
    std::uint64_t n_strata = 1;
    for (int k = 0; k < dim; ++k) n_strata *= static_cast<std::uint64_t>(S);
    const std::uint64_t n_per = std::max<std::uint64_t>(2, cfg.max_evals / n_strata);

    std::vector<detail::StratumAccumulator> acc(n_strata);

    std::atomic<std::uint64_t> next{0};
    auto worker = [&]() {
        double u[6];
        std::uint64_t cell[6];
        for (;;) {
            const std::uint64_t j = next.fetch_add(1, std::memory_order_relaxed);
            if (j >= n_strata) return;
            std::uint64_t r = j;
            for (int k = 0; k < dim; ++k) {
                cell[k] = r % static_cast<std::uint64_t>(S);
                r /= static_cast<std::uint64_t>(S);
            }
            Xoshiro256 rng = substream(cfg.seed, j);
            detail::StratumAccumulator a;
            for (std::uint64_t i = 0; i < n_per; ++i) {
                for (int k = 0; k < dim; ++k)
                    u[k] = (static_cast<double>(cell[k]) + rng.uniform_open()) / S;
                const double v = f(static_cast<const double*>(u));
                if (std::isnan(v)) {
                    ++a.bad;
                    continue;
                }
                a.sum += v;
                a.sum_sq += v * v;
            }
            acc[j] = a;
        }
    };

    const int n_threads = std::max(1, cfg.threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::uint64_t bad_total = 0;
    for (const auto& a : acc) bad_total += a.bad;
    if (bad_total > 0)
        throw IntegrandError("stratified_mc: integrand produced NaN in " +
                                 std::to_string(bad_total) + " of " +
                                 std::to_string(n_per * n_strata) + " evaluations",
                             bad_total);

    // Stratified mean over equal-volume cells with equal sample counts equals
    // the overall sample mean; its variance is the sum of per-stratum
    // mean-variances scaled by the squared cell volume.
    std::vector<double> sums(n_strata), vars(n_strata);
    for (std::uint64_t j = 0; j < n_strata; ++j) {
        sums[j] = acc[j].sum;
        const double mean_j = acc[j].sum / static_cast<double>(n_per);
        const double ss =
            std::max(0.0, acc[j].sum_sq - static_cast<double>(n_per) * mean_j * mean_j);
        vars[j] = ss / static_cast<double>(n_per - 1);
    }
    const double inv_cells = 1.0 / static_cast<double>(n_strata);
    IntegralResult out;
    out.value = pairwise_sum(sums) * inv_cells / static_cast<double>(n_per);
    out.error_estimate = std::sqrt(pairwise_sum(vars) / static_cast<double>(n_per)) * inv_cells;
    out.n_evals = n_per * n_strata;
    out.converged = out.error_estimate <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(out.value));
    return out;
}

// ---------------------------------------------------------------------------
// Importance maps from unit-cube coordinates to R^3
// ---------------------------------------------------------------------------

/// Isotropic Gaussian N(mean, sigma^2 I): uses three cube coordinates.
struct GaussianMap3 {
    Vec3 mean{};
    double sigma = 1.0;

    Vec3 map(const double* u) const {
        return mean + Vec3(inv_normal_cdf(u[0]), inv_normal_cdf(u[1]), inv_normal_cdf(u[2])) *
                          sigma;
    }
    double pdf(const Vec3& z) const {
        const double r2 = (z - mean).norm2();
        const double s2 = sigma * sigma;
        return std::exp(-0.5 * r2 / s2) / std::pow(2.0 * M_PI * s2, 1.5);
    }
};

/// Mixture importance density on R^3 whose components are either isotropic
/// Gaussians or Coulomb shells. A Coulomb shell centered at c has density
/// q(z) = L / (4 pi r^2 (L + r)^2), r = |z - c|: a 1/r^2 core that absorbs
/// Coulomb singularities and a 1/r^4 tail that still covers long-range
/// integrands. Sampling uses four cube coordinates (component pick + 3).
struct Mixture3 {
    struct Component {
        enum class Kind { gaussian, coulomb_shell };
        Kind kind = Kind::gaussian;
        double weight = 1.0;  ///< relative; normalized internally
        Vec3 center{};
        double scale = 1.0;  ///< sigma for gaussian, L for coulomb_shell
    };
    std::vector<Component> components;

    static constexpr int kDim = 4;

    void add_gaussian(double weight, const Vec3& center, double sigma) {
        components.push_back({Component::Kind::gaussian, weight, center, sigma});
    }
    void add_coulomb_shell(double weight, const Vec3& center, double L) {
        components.push_back({Component::Kind::coulomb_shell, weight, center, L});
    }

    double total_weight() const {
        double w = 0.0;
        for (const auto& c : components) w += c.weight;
        return w;
    }

    Vec3 map(const double* u) const {
        const double w_total = total_weight();
        double pick = u[0] * w_total;
        std::size_t i = 0;
        for (; i + 1 < components.size(); ++i) {
            if (pick < components[i].weight) break;
            pick -= components[i].weight;
        }
        const Component& c = components[i];
        if (c.kind == Component::Kind::gaussian) {
            return c.center + Vec3(inv_normal_cdf(u[1]), inv_normal_cdf(u[2]),
                                   inv_normal_cdf(u[3])) *
                                  c.scale;
        }
        const double r = c.scale * u[1] / (1.0 - u[1]);
        const double mu = 2.0 * u[2] - 1.0;
        const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        const double phi = 2.0 * M_PI * u[3];
        return c.center + Vec3(r * st * std::cos(phi), r * st * std::sin(phi), r * mu);
    }

    double pdf(const Vec3& z) const {
        const double w_total = total_weight();
        double q = 0.0;
        for (const auto& c : components) {
            const double r2 = (z - c.center).norm2();
            if (c.kind == Component::Kind::gaussian) {
                const double s2 = c.scale * c.scale;
                q += c.weight * std::exp(-0.5 * r2 / s2) / std::pow(2.0 * M_PI * s2, 1.5);
            } else {
                const double r = std::sqrt(r2);
                const double lr = c.scale + r;
                q += c.weight * c.scale / (4.0 * M_PI * r2 * lr * lr);
            }
        }
        return q / w_total;
    }
};

/// Convenience driver: integral of h over R^3 using a mixture importance
/// density, evaluated as E[h(z)/q(z)] by stratified MC in 4D.
template <class H>
IntegralResult integrate_r3_mixture(const Mixture3& q, const QuadratureConfig& cfg, H&& h) {
    return stratified_mc(Mixture3::kDim, cfg, [&](const double* u) {
        const Vec3 z = q.map(u);
        return h(z) / q.pdf(z);
    });
}

}  // namespace gpsl
