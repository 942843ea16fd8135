#include "gpsl/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpsl/errors.hpp"
#include "gpsl/kernels.hpp"
#include "gpsl/quadrature.hpp"
#include "gpsl/single_particle.hpp"
#include "gpsl/special.hpp"

namespace gpsl {

void LatticeState::validate() const {
    if (sites.empty()) throw ConfigError("LatticeState: needs at least one site");
    if (sites.size() != amplitudes.size())
        throw ConfigError("LatticeState: sites and amplitudes must have equal length");
    const double n2 = norm2();
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw ConfigError("LatticeState: state norm must be positive and finite");
}

double LatticeState::norm2() const {
    double n2 = 0.0;
    for (const auto& a : amplitudes) n2 += std::norm(a);
    return n2;
}

void LatticeState::normalize() {
    const double n2 = norm2();
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw ConvergenceError("LatticeState: cannot normalize a degenerate state");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amplitudes) a *= inv;
}

LatticeState two_site_superposition(double d_tilde, const ModelParams& params) {
    params.validate();
    if (!(d_tilde > 0.0))
        throw ConfigError("two_site_superposition: d_tilde must be > 0");
    const double half = params.r_C * d_tilde;
    LatticeState s;
    s.sites = {Vec3{0.0, 0.0, -half}, Vec3{0.0, 0.0, +half}};
    const double amp = 1.0 / std::sqrt(2.0);
    s.amplitudes = {amp, amp};
    return s;
}

void TrajectoryConfig::validate() const {
    particle.validate();
    params.validate();
    if (!(dt > 0.0)) throw ConfigError("TrajectoryConfig: dt must be > 0");
    if (!(t_final >= dt)) throw ConfigError("TrajectoryConfig: t_final must be >= dt");
    if (n_trajectories == 0)
        throw ConfigError("TrajectoryConfig: n_trajectories must be >= 1");
    const double per_step = dt * params.gamma * particle.mass / params.constants.m0;
    if (per_step > 0.01 * (1.0 + 1e-12))
        throw ConfigError(
            "TrajectoryConfig: dt too coarse, need dt gamma m/m0 <= 0.01 (got " +
            std::to_string(per_step) + ")");
}

double default_dt(const ParticleSpec& particle, const ModelParams& params) {
    particle.validate();
    params.validate();
    return 0.01 * params.constants.m0 / (params.gamma * particle.mass);
}

namespace {

/// Born site choice, collapse center draw, amplitude update, renormalize.
/// Draw order: 1 uniform (site), then 3 normals (center offset).
StepEvent apply_jump(LatticeState& state, const TrajectoryConfig& cfg, double r_p,
                     Xoshiro256& rng) {
    const std::size_t n = state.sites.size();
    const double total = state.norm2();
    const double pick = rng.uniform() * total;
    std::size_t site = n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += std::norm(state.amplitudes[i]);
        if (pick < acc) {
            site = i;
            break;
        }
    }

    const double r_C = cfg.params.r_C;
    const Vec3 x_c =
        state.sites[site] + Vec3{rng.normal(), rng.normal(), rng.normal()} * r_C;

    for (std::size_t j = 0; j < n; ++j) {
        const double r = (state.sites[j] - x_c).norm();
        const double damp = std::exp(-r * r / (4.0 * r_C * r_C));
        const double phase = cfg.gravity_on ? r_p * erf_kernel_f(r, r_C) : 0.0;
        state.amplitudes[j] *= std::polar(damp, phase);
    }

    const double n2 = state.norm2();
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw ConvergenceError("jump update produced a degenerate state norm");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : state.amplitudes) a *= inv;

    return {true, site, x_c};
}

}  // namespace

StepEvent step(LatticeState& state, const TrajectoryConfig& cfg, Xoshiro256& rng) {
    state.validate();
    cfg.validate();
    const double p_jump =
        cfg.params.gamma * cfg.particle.mass / cfg.params.constants.m0 * cfg.dt;
    if (rng.uniform() >= p_jump) return {};
    return apply_jump(state, cfg, cfg.particle.r_p(cfg.params), rng);
}

std::size_t EnsembleResult::pair_index(std::size_t i, std::size_t j) const {
    if (i > j || j >= n_sites) throw DomainError("EnsembleResult: bad pair index");
    return i * n_sites - i * (i - 1) / 2 + (j - i);
}

std::complex<double> EnsembleResult::rho_mean(std::size_t t, std::size_t i,
                                              std::size_t j) const {
    const bool flip = i > j;
    if (flip) std::swap(i, j);
    const std::size_t n_pairs = n_sites * (n_sites + 1) / 2;
    const std::complex<double> v = rho_mean_flat.at(t * n_pairs + pair_index(i, j));
    return flip ? std::conj(v) : v;
}

std::complex<double> EnsembleResult::rho_se(std::size_t t, std::size_t i,
                                            std::size_t j) const {
    if (i > j) std::swap(i, j);
    const std::size_t n_pairs = n_sites * (n_sites + 1) / 2;
    return rho_se_flat.at(t * n_pairs + pair_index(i, j));
}

namespace {

/// Shared ensemble driver: `advance(state, rng, k)` moves one trajectory
/// from recording point k-1 to k and returns the number of jumps applied.
template <class Advance>
EnsembleResult ensemble_driver(const LatticeState& initial, const TrajectoryConfig& cfg,
                               Advance&& advance) {
    initial.validate();
    cfg.validate();
    if (initial.sites.size() < 2)
        throw ConfigError("run_ensemble: coherence observables need at least two sites");

    LatticeState start = initial;
    start.normalize();

    const std::size_t n_steps =
        static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
    const std::size_t n_times = n_steps + 1;
    const std::size_t n_sites = start.sites.size();
    const std::size_t n_pairs = n_sites * (n_sites + 1) / 2;
    const std::size_t n_slots = n_times * n_pairs;

    constexpr std::uint64_t kChunk = 64;
    const std::uint64_t n_chunks = (cfg.n_trajectories + kChunk - 1) / kChunk;

    // Per-chunk partial sums of re, re^2, im, im^2 for every slot; reduced
    // pairwise over chunks at the end so the result does not depend on how
    // trajectories were batched.
    std::vector<std::vector<double>> part(4);
    for (auto& p : part) p.assign(n_chunks * n_slots, 0.0);

    std::vector<std::uint64_t> collapse_counts;
    collapse_counts.reserve(cfg.n_trajectories);
    std::uint64_t failed = 0;

    std::vector<std::complex<double>> record(n_slots);
    for (std::uint64_t traj = 0; traj < cfg.n_trajectories; ++traj) {
        Xoshiro256 rng = substream(cfg.seed, traj);
        LatticeState state = start;
        std::uint64_t jumps = 0;
        bool ok = true;
        for (std::size_t k = 0; k < n_times; ++k) {
            if (k > 0) {
                try {
                    jumps += advance(state, rng, k);
                } catch (const ConvergenceError&) {
                    ok = false;
                    break;
                }
            }
            std::size_t slot = k * n_pairs;
            for (std::size_t i = 0; i < n_sites; ++i)
                for (std::size_t j = i; j < n_sites; ++j)
                    record[slot++] =
                        state.amplitudes[i] * std::conj(state.amplitudes[j]);
        }
        if (!ok) {
            ++failed;
            continue;
        }
        collapse_counts.push_back(jumps);
        const std::size_t base = static_cast<std::size_t>(traj / kChunk) * n_slots;
        for (std::size_t s = 0; s < n_slots; ++s) {
            const double re = record[s].real(), im = record[s].imag();
            part[0][base + s] += re;
            part[1][base + s] += re * re;
            part[2][base + s] += im;
            part[3][base + s] += im * im;
        }
    }

    const std::uint64_t n_ok = cfg.n_trajectories - failed;
    if (n_ok == 0)
        throw ConvergenceError("run_ensemble: every trajectory degenerated");

    EnsembleResult out;
    out.n_sites = n_sites;
    out.n_trajectories = n_ok;
    out.failed_trajectories = failed;
    out.collapse_counts = std::move(collapse_counts);
    out.times.resize(n_times);
    for (std::size_t k = 0; k < n_times; ++k) out.times[k] = static_cast<double>(k) * cfg.dt;
    out.rho_mean_flat.resize(n_slots);
    out.rho_se_flat.resize(n_slots);

    const double n = static_cast<double>(n_ok);
    std::vector<double> chunk_vals(n_chunks);
    for (std::size_t s = 0; s < n_slots; ++s) {
        double moment[4];
        for (int c = 0; c < 4; ++c) {
            for (std::uint64_t ch = 0; ch < n_chunks; ++ch)
                chunk_vals[ch] = part[static_cast<std::size_t>(c)][ch * n_slots + s];
            moment[c] = pairwise_sum(chunk_vals);
        }
        const double mean_re = moment[0] / n;
        const double mean_im = moment[2] / n;
        const double var_re =
            std::max(0.0, moment[1] / n - mean_re * mean_re) / (n > 1.0 ? n - 1.0 : 1.0);
        const double var_im =
            std::max(0.0, moment[3] / n - mean_im * mean_im) / (n > 1.0 ? n - 1.0 : 1.0);
        out.rho_mean_flat[s] = {mean_re, mean_im};
        out.rho_se_flat[s] = {std::sqrt(var_re), std::sqrt(var_im)};
    }
    return out;
}

}  // namespace

EnsembleResult run_ensemble(const LatticeState& initial, const TrajectoryConfig& cfg) {
    const double p_jump =
        cfg.params.gamma * cfg.particle.mass / cfg.params.constants.m0 * cfg.dt;
    const double r_p = cfg.particle.r_p(cfg.params);
    return ensemble_driver(
        initial, cfg,
        [&](LatticeState& state, Xoshiro256& rng, std::size_t) -> std::uint64_t {
            if (rng.uniform() >= p_jump) return 0;
            apply_jump(state, cfg, r_p, rng);
            return 1;
        });
}

EnsembleResult run_ensemble_event_driven(const LatticeState& initial,
                                         const TrajectoryConfig& cfg) {
    const double rate =
        cfg.params.gamma * cfg.particle.mass / cfg.params.constants.m0;
    const double r_p = cfg.particle.r_p(cfg.params);
    // Wait clock for the trajectory currently advancing, re-armed on the
    // k = 1 call: the driver hands each trajectory a fresh RNG, so its first
    // interval draw happens on its first advance.
    double next_jump = -1.0;
    return ensemble_driver(
        initial, cfg,
        [&](LatticeState& state, Xoshiro256& rng, std::size_t k) -> std::uint64_t {
            if (k == 1) next_jump = -std::log(rng.uniform_open()) / rate;
            const double t_end = static_cast<double>(k) * cfg.dt;
            std::uint64_t jumps = 0;
            while (next_jump <= t_end) {
                apply_jump(state, cfg, r_p, rng);
                ++jumps;
                next_jump += -std::log(rng.uniform_open()) / rate;
            }
            return jumps;
        });
}

DecayFit decay_rate_fit(const EnsembleResult& ensemble, std::size_t i, std::size_t j) {
    std::vector<double> t, mag, sig;
    for (std::size_t k = 0; k < ensemble.times.size(); ++k) {
        const std::complex<double> v = ensemble.rho_mean(k, i, j);
        const std::complex<double> se = ensemble.rho_se(k, i, j);
        const double vre = se.real() * se.real();
        const double vim = se.imag() * se.imag();
        const double se2 = vre + vim;
        // |mean|^2 overestimates the true squared magnitude by the sampling
        // variance (the noise power adds); subtract it so the log fit is not
        // tilted shallow at late times where the signal-to-noise drops.
        const double m2 = std::norm(v) - se2;
        if (se2 > 0.0 && m2 > 25.0 * se2) {
            t.push_back(ensemble.times[k]);
            // Concavity of the log still biases log(m) low by
            // Var(m^2)/(4 m^4) per point. Left alone that tilts the fitted
            // rate high by a fixed amount regardless of the trajectory
            // budget, because each point's weight is the inverse of its
            // bias; the second-order correction cancels the tilt.
            const double var_m2 = 4.0 * (v.real() * v.real() * vre +
                                         v.imag() * v.imag() * vim) +
                                  2.0 * (vre * vre + vim * vim);
            const double log_debias = var_m2 / (4.0 * m2 * m2);
            mag.push_back(std::sqrt(m2) * std::exp(log_debias));
            sig.push_back(std::sqrt(var_m2) / (2.0 * std::sqrt(m2)));
        }
    }
    if (t.size() < 10)
        throw ConvergenceError(
            "decay_rate_fit: fewer than 10 resolved points (|rho| > 5 SE); "
            "more trajectories or a shorter horizon needed");

    const LogLinearFit fit = fit_log_linear(t, mag, sig);
    DecayFit out;
    out.rate = -fit.slope;
    out.rate_std_error = fit.slope_std_error;
    out.n_points = t.size();
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double resid = std::log(mag[k]) - (fit.intercept + fit.slope * t[k]);
        const double sl = sig[k] / mag[k];
        out.chi2 += resid * resid / (sl * sl);
    }
    const double dof = static_cast<double>(t.size() - 2);
    out.quality_warning = (out.chi2 - dof) / std::sqrt(2.0 * dof) > 5.0;
    return out;
}

BatchedRate batched_decay_rate(const LatticeState& initial, const TrajectoryConfig& cfg,
                               std::size_t n_batches, std::size_t i, std::size_t j) {
    if (n_batches < 2) throw ConfigError("batched_decay_rate: need at least 2 batches");
    if (cfg.n_trajectories < n_batches)
        throw ConfigError("batched_decay_rate: fewer trajectories than batches");

    std::vector<double> rates;
    rates.reserve(n_batches);
    TrajectoryConfig batch_cfg = cfg;
    batch_cfg.n_trajectories = cfg.n_trajectories / n_batches;
    for (std::size_t b = 0; b < n_batches; ++b) {
        batch_cfg.seed =
            SplitMix64(cfg.seed + 0x9E3779B97F4A7C15ULL * (b + 1)).next();
        const EnsembleResult ens = run_ensemble(initial, batch_cfg);
        rates.push_back(decay_rate_fit(ens, i, j).rate);
    }

    const double nb = static_cast<double>(n_batches);
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= nb;
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    var /= nb * (nb - 1.0);
    return {mean, std::sqrt(var), n_batches};
}

double poisson_counts_pvalue(const std::vector<std::uint64_t>& counts, double mean) {
    if (counts.empty()) throw DomainError("poisson_counts_pvalue: no counts");
    if (!(mean > 0.0)) throw DomainError("poisson_counts_pvalue: mean must be > 0");
    const double n = static_cast<double>(counts.size());

    // Expected counts per occupancy k until the remaining tail mass is small.
    std::vector<double> expected;
    double cdf = 0.0;
    std::uint64_t k = 0;
    while (cdf < 1.0 - 1e-12 / n && k < 10000) {
        const double pmf =
            std::exp(-mean + static_cast<double>(k) * std::log(mean) -
                     std::lgamma(static_cast<double>(k) + 1.0));
        expected.push_back(n * pmf);
        cdf += pmf;
        ++k;
    }
    expected.push_back(n * std::max(0.0, 1.0 - cdf));  // open tail bin

    std::vector<double> observed(expected.size(), 0.0);
    for (std::uint64_t c : counts)
        observed[std::min<std::size_t>(c, observed.size() - 1)] += 1.0;

    // Merge adjacent bins left to right until each holds expectation >= 5.
    std::vector<double> exp_m, obs_m;
    double e_acc = 0.0, o_acc = 0.0;
    for (std::size_t b = 0; b < expected.size(); ++b) {
        e_acc += expected[b];
        o_acc += observed[b];
        if (e_acc >= 5.0) {
            exp_m.push_back(e_acc);
            obs_m.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp_m.empty()) {
            exp_m.push_back(e_acc);
            obs_m.push_back(o_acc);
        } else {
            exp_m.back() += e_acc;
            obs_m.back() += o_acc;
        }
    }
    if (exp_m.size() < 2) return 1.0;

    double chi2 = 0.0;
    for (std::size_t b = 0; b < exp_m.size(); ++b) {
        const double d = obs_m[b] - exp_m[b];
        chi2 += d * d / exp_m[b];
    }
    return chi_squared_pvalue(chi2, static_cast<double>(exp_m.size() - 1));
}

double ks_normal_pvalue(std::vector<double> samples) {
    if (samples.empty()) throw DomainError("ks_normal_pvalue: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d_stat = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double u = 0.5 * erfc(-samples[i] * M_SQRT1_2);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d_stat = std::max({d_stat, u - lo, hi - u});
    }
    const double sqrt_n = std::sqrt(n);
    return kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d_stat);
}

}  // namespace gpsl
