#pragma once

#include <vector>

#include "gpsl/constants.hpp"
#include "gpsl/quadrature.hpp"

namespace gpsl {

/// Model variants producing a decoherence rate.
enum class Model { GPSL_exact, GPSL_perturbative, TD_CSL, TD_DP };

const char* model_name(Model m);

/// One point of a decoherence curve: dimensionless separation
/// d_tilde = |x - y|/(2 r_C) and the off-diagonal decay rate at it.
struct DecoherencePoint {
    double d_tilde = 0.0;
    double rate = 0.0;   ///< s^-1
    double error = 0.0;  ///< s^-1, MC standard error (0 for closed forms)
    Model model = Model::GPSL_exact;
    bool converged = true;
    /// Informational flag: set when r_p > 0.1 r_C, i.e. outside the regime
    /// where the feedback phase is a small correction. The exact evaluation
    /// remains valid; only interpretation alongside the perturbative curve
    /// needs care.
    bool validity_warning = false;
};

/// Ordered curve of rates for one model with the parameters that produced it.
struct DecoherenceCurve {
    Model model = Model::GPSL_exact;
    std::vector<DecoherencePoint> points;
    ModelParams params;
    ParticleSpec particle;
};

/// The 4D reduced integral F(d) entering the perturbative feedback term:
///   F(d) = 4 pi^2 int dtheta_k dtheta_v dk dv
///          e^{-(k^2+v^2-k v cos t_k cos t_v)} I0(k v sin t_k sin t_v)
///          sin t_k sin t_v sin(d k cos t_k) sin(d v cos t_v)
/// over [0,pi]^2 x [0,inf)^2. Monte Carlo evaluation (importance: uniform
/// angles, half-normal radii; the Bessel factor is folded into a scaled
/// exponential that can never overflow).
IntegralResult f_tilde_mc(double d_tilde, const QuadratureConfig& cfg);

/// Deterministic tensor Gauss-Legendre evaluation of the same integral
/// (n_radial nodes on the radial axes, n_angular on the angular axes). The
/// error estimate is the difference against a coarser embedded rule.
IntegralResult f_tilde_quadrature(double d_tilde, int n_radial = 60, int n_angular = 40);

/// Strategy dispatch: MC strategies use f_tilde_mc, adaptive_1d selects the
/// deterministic tensor quadrature.
IntegralResult f_tilde(double d_tilde, const QuadratureConfig& cfg);

/// Cubic-spline table of F on the fixed grid d in {0, 0.05, ..., 6}, built
/// once by deterministic quadrature; beyond the grid the observed exponential
/// tail is extended analytically. This is what the perturbative rate uses by
/// default: F is smooth and expensive.
class FtildeTable {
public:
    /// Process-wide table, built on first use.
    static const FtildeTable& standard();

    /// Build from explicit quadrature orders (used by tests).
    FtildeTable(double d_max, double step, int n_radial, int n_angular);

    double operator()(double d_tilde) const;
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> grid_, values_, second_derivs_;
    double step_ = 0.05;
    double tail_decay_ = 1.26;  ///< decay constant of the extension beyond the grid
};

/// Exact GPSL decoherence rate between positions separated by 2 r_C d_tilde:
///   Gamma = (gamma m_p/m0) [1 - e^{-d^2/2} E_z cos(r_p (f(z-x) - f(z-y)))]
/// where z is drawn from the exact Gaussian weight sqrt(g(x-z) g(y-z))
/// normalized (a normal law centered on the midpoint), so the MC converges at
/// the optimal rate. The imaginary part is identically zero by midpoint
/// symmetry and is dropped.
DecoherencePoint gamma_gpsl_exact(double d_tilde, const ParticleSpec& particle,
                                  const ModelParams& params, const QuadratureConfig& cfg);

/// Perturbative GPSL rate (expansion in r_p/r_C, trust region r_p <= 0.1 r_C,
/// enforced):
///   Gamma = gamma (m_p/m0) [1 - e^{-d^2/2} + (r_p/r_C)^2 e^{-d^2/2}/(2 pi^4) F(d)]
/// F evaluated through the standard table.
DecoherencePoint gamma_gpsl_perturbative(double d_tilde, const ParticleSpec& particle,
                                         const ModelParams& params);

/// Same, but evaluating F directly with the given configuration instead of
/// the table.
DecoherencePoint gamma_gpsl_perturbative_direct(double d_tilde, const ParticleSpec& particle,
                                                const ModelParams& params,
                                                const QuadratureConfig& cfg);

/// Closed-form comparator rates.
DecoherencePoint gamma_td_dp(double d_tilde, const ParticleSpec& particle,
                             const ModelParams& params);
DecoherencePoint gamma_td_csl(double d_tilde, const ParticleSpec& particle,
                              const ModelParams& params, const TDParams& td);

/// Large-separation plateaus.
double gamma_gpsl_limit(const ParticleSpec& particle, const ModelParams& params);
double gamma_td_dp_limit(const ParticleSpec& particle, const ModelParams& params);

/// Mass at which the GPSL and DP plateaus cross: above it the DP rate
/// exceeds the GPSL one at large separation.
double crossover_mass(const ModelParams& params);

/// Null check of the self-interaction term: the two smeared-Coulomb averages
/// taken around each superposition branch coincide by midpoint reflection
/// symmetry, so their difference (estimated with common samples) must vanish
/// within MC error.
IntegralResult self_interaction_null_check(double d_tilde, const QuadratureConfig& cfg);

/// Weighted least-squares fit of c in F ~ c d^2 over the given points.
struct QuadraticFit {
    double coefficient = 0.0;
    double std_error = 0.0;
};
QuadraticFit fit_quadratic_coefficient(const std::vector<double>& d,
                                       const std::vector<double>& value,
                                       const std::vector<double>& sigma);

/// Weighted least-squares line log(value) = intercept + slope * d.
struct LogLinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
};
LogLinearFit fit_log_linear(const std::vector<double>& d, const std::vector<double>& value,
                            const std::vector<double>& sigma);

}  // namespace gpsl
