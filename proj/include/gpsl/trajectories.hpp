#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "gpsl/constants.hpp"
#include "gpsl/rng.hpp"
#include "gpsl/vec3.hpp"

/// Stochastic jump trajectories for a particle on a discrete set of sites.
/// Between jumps nothing evolves (the sites are static labels); a jump picks
/// a site with Born weights, draws a collapse center around it, damps every
/// amplitude by the collapse Gaussian and rotates it by the feedback phase,
/// then renormalizes.

namespace gpsl {

/// Wavefunction on discrete sites. A single site is a valid state (the jump
/// update is well defined); ensemble observables need at least two.
struct LatticeState {
    std::vector<Vec3> sites;
    std::vector<std::complex<double>> amplitudes;

    void validate() const;
    double norm2() const;
    void normalize();
};

/// Equal superposition over two sites at -+(r_C d_tilde) on the z axis —
/// the canonical configuration all the rate comparisons use.
LatticeState two_site_superposition(double d_tilde, const ModelParams& params);

/// Simulation parameters. The step size must resolve the jump process:
/// dt gamma m/m0 <= 0.01 is enforced.
struct TrajectoryConfig {
    double dt = 0.0;
    double t_final = 0.0;
    std::uint64_t n_trajectories = 1;
    std::uint64_t seed = 1;
    ParticleSpec particle{};
    ModelParams params{};
    bool gravity_on = true;

    void validate() const;
};

/// Step size giving jump probability 0.01 per step for these parameters.
double default_dt(const ParticleSpec& particle, const ModelParams& params);

/// What one fixed-dt step did.
struct StepEvent {
    bool jumped = false;
    std::size_t site_index = 0;
    Vec3 collapse_center{};
};

/// Advance one step of length cfg.dt: Bernoulli jump decision, then (on a
/// jump) Born site choice, Gaussian collapse center, amplitude update and
/// renormalization. Draw order per step: 1 uniform, then on a jump 1 uniform
/// + 3 normals. Throws ConvergenceError if the post-jump norm is not a
/// positive finite number.
StepEvent step(LatticeState& state, const TrajectoryConfig& cfg, Xoshiro256& rng);

/// Ensemble-averaged pure-state density matrix on the recording grid
/// t = 0, dt, ..., t_final. Entries are stored for the upper triangle
/// (i <= j) in row-major pair order.
struct EnsembleResult {
    std::vector<double> times;
    std::size_t n_sites = 0;
    std::uint64_t n_trajectories = 0;   ///< successfully completed
    std::uint64_t failed_trajectories = 0;
    std::vector<std::uint64_t> collapse_counts;  ///< per completed trajectory

    std::vector<std::complex<double>> rho_mean_flat;
    /// Componentwise standard errors of the mean, stored as re/im of a
    /// complex for convenience.
    std::vector<std::complex<double>> rho_se_flat;

    std::size_t pair_index(std::size_t i, std::size_t j) const;
    std::complex<double> rho_mean(std::size_t t, std::size_t i, std::size_t j) const;
    std::complex<double> rho_se(std::size_t t, std::size_t i, std::size_t j) const;
};

/// Run cfg.n_trajectories fixed-dt trajectories from `initial` (at least two
/// sites). Trajectory t uses substream(cfg.seed, t), so the ensemble mean is
/// bit-reproducible and independent of batching. Trajectories whose jump
/// update degenerates are counted in failed_trajectories and excluded from
/// the averages; if none complete, throws ConvergenceError.
EnsembleResult run_ensemble(const LatticeState& initial, const TrajectoryConfig& cfg);

/// Same ensemble law, advanced by exponential waiting times between jumps
/// instead of per-step Bernoulli draws, recorded on the same grid. An
/// independent discretization used to cross-check the fixed-dt stepper.
EnsembleResult run_ensemble_event_driven(const LatticeState& initial,
                                         const TrajectoryConfig& cfg);

/// Weighted log-linear fit of |rho_ij(t)| -> decay rate.
struct DecayFit {
    double rate = 0.0;
    double rate_std_error = 0.0;
    double chi2 = 0.0;
    std::size_t n_points = 0;
    /// Set when the fit residuals are statistically inconsistent with a
    /// single exponential: (chi2 - dof)/sqrt(2 dof) > 5.
    bool quality_warning = false;
};

/// Fit the decay of |rho_ij| using points where the magnitude is resolved
/// (noise-debiased |rho| > 5 SE, SE > 0); requires at least 10 such points,
/// else throws ConvergenceError. The quoted standard error treats the time
/// points as independent, which understates the uncertainty because they
/// share trajectories; for calibrated comparisons use batched_decay_rate.
DecayFit decay_rate_fit(const EnsembleResult& ensemble, std::size_t i = 0,
                        std::size_t j = 1);

/// Decay rate averaged over independent sub-ensembles: the trajectory budget
/// is split into n_batches runs with derived seeds, each fitted separately,
/// and the spread of the independent batch rates gives an honest standard
/// error (the single-ensemble fit SE does not, since its time points are
/// correlated through the shared trajectories).
struct BatchedRate {
    double rate = 0.0;
    double std_error = 0.0;
    std::size_t n_batches = 0;
};
BatchedRate batched_decay_rate(const LatticeState& initial, const TrajectoryConfig& cfg,
                               std::size_t n_batches, std::size_t i = 0,
                               std::size_t j = 1);

/// Chi-squared p-value for observed event counts against a Poisson law with
/// the given mean: bins with expected count < 5 are merged into the tail,
/// degrees of freedom = bins - 1 (the mean is fixed, not fitted).
double poisson_counts_pvalue(const std::vector<std::uint64_t>& counts, double mean);

/// Kolmogorov-Smirnov p-value of standardized samples against N(0, 1)
/// (finite-n corrected statistic).
double ks_normal_pvalue(std::vector<double> samples);

}  // namespace gpsl
