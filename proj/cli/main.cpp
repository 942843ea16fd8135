/// Command-line surface: figure reproduction (CSV + static SVG), rate
/// tables, force/covariance reports and the trajectory ensemble driver.
///
/// Conventions shared by every subcommand:
///   - flat `key = value` config file via --config; precedence is
///     defaults < config file < flags < GPSL_SEED (seed only);
///   - every CSV starts with one '#' metadata line carrying the resolved
///     configuration and seed (thread count and output paths excluded:
///     they never influence the numbers);
///   - exit codes: 0 success, 2 usage or config error, 3 numerical
///     non-convergence, 4 quantitative-gate failure.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "gpsl/constants.hpp"
#include "gpsl/errors.hpp"
#include "gpsl/fluctuations.hpp"
#include "gpsl/forces.hpp"
#include "gpsl/quadrature.hpp"
#include "gpsl/rigid_sphere.hpp"
#include "gpsl/rng.hpp"
#include "gpsl/single_particle.hpp"
#include "gpsl/trajectories.hpp"
#include "svg.hpp"

namespace gpsl::cli {
namespace {

constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ULL;

/// Derived per-task seed: decorrelates work units that share one user seed.
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64{seed + kSeedStride * (index + 1)}.next();
}

__attribute__((format(printf, 1, 2))) std::string strf(const char* pattern, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, ap);
    va_end(ap);
    return buf;
}

/// The '#' metadata line prepended to every CSV.
class Meta {
public:
    explicit Meta(const std::string& command) : s_("command=" + command) {}
    Meta& add(const std::string& key, const std::string& value) {
        s_ += " " + key + "=" + value;
        return *this;
    }
    Meta& add(const std::string& key, double value) { return add(key, csv_num(value)); }
    Meta& add(const std::string& key, std::uint64_t value) {
        return add(key, std::to_string(value));
    }
    const std::string& str() const { return s_; }

private:
    std::string s_;
};

struct CommonOpts {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = ".";
    std::string config_path;

    /// Resolves the effective seed (GPSL_SEED wins) and prepares out_dir.
    void finalize() {
        if (auto env = env_seed_override()) seed = *env;
        if (threads < 1) throw ConfigError("--threads must be >= 1");
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory: " + out_dir);
    }

    std::string path(const std::string& name) const {
        return (std::filesystem::path(out_dir) / name).string();
    }

    QuadratureConfig quad(std::uint64_t task_index, std::uint64_t samples) const {
        QuadratureConfig cfg;
        cfg.seed = derived_seed(seed, task_index);
        cfg.max_evals = samples;
        cfg.threads = threads;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    const auto take_last = CLI::MultiOptionPolicy::TakeLast;
    cmd->add_option("--seed", c.seed, "random seed (GPSL_SEED env var overrides)")
        ->capture_default_str()
        ->multi_option_policy(take_last);
    cmd->add_option("--threads", c.threads,
                    "worker threads; never changes results, only wall time")
        ->capture_default_str()
        ->multi_option_policy(take_last);
    cmd->add_option("--out-dir", c.out_dir, "directory for output files")
        ->capture_default_str()
        ->multi_option_policy(take_last);
    cmd->add_option("--config", c.config_path, "flat key = value config file")
        ->multi_option_policy(take_last);
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ConfigError("invalid range: need finite min <= max and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(n);
    for (std::size_t i = 0; i < n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
    return grid;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = s.find(sep, start);
        if (end == std::string::npos) {
            parts.push_back(trim(s.substr(start)));
            break;
        }
        parts.push_back(trim(s.substr(start, end - start)));
        start = end + 1;
    }
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse number '" + s + "' in " + what);
    }
}

// ---------------------------------------------------------------------------
// ftilde
// ---------------------------------------------------------------------------

struct FtildeOpts {
    CommonOpts common;
    double d_min = 0.0;
    double d_max = 6.0;
    double step = 0.05;
    std::string method = "quadrature";
    std::uint64_t samples = 400000;
};

int run_ftilde(FtildeOpts& o) {
    o.common.finalize();
    if (!(o.d_min >= 0.0)) throw ConfigError("--d-min must be >= 0");
    const bool use_mc = o.method == "mc";
    if (!use_mc && o.method != "quadrature")
        throw ConfigError("--method must be 'quadrature' or 'mc'");
    const std::vector<double> grid = make_grid(o.d_min, o.d_max, o.step);

    std::vector<double> value(grid.size()), error(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        IntegralResult r;
        if (use_mc) {
            r = f_tilde_mc(grid[i], o.common.quad(i, o.samples));
        } else {
            r = f_tilde_quadrature(grid[i]);
            if (!r.converged || !std::isfinite(r.value))
                throw ConvergenceError(strf("feedback integral quadrature failed at d = %g",
                                            grid[i]));
        }
        value[i] = r.value;
        error[i] = r.error_estimate;
    }

    Meta meta("ftilde");
    meta.add("d_min", o.d_min)
        .add("d_max", o.d_max)
        .add("step", o.step)
        .add("method", o.method)
        .add("samples", o.samples)
        .add("seed", o.common.seed);
    CsvWriter csv(o.common.path("ftilde.csv"), meta.str());
    csv.header({"d_tilde", "f_tilde", "std_error"});
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv.row({csv_num(grid[i]), csv_num(value[i]), csv_num(error[i])});

    // Re-fit of the two branch parameterizations against our own curve.
    std::vector<double> dq, fq, sq, dt, ft, st;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] >= 0.01 && grid[i] <= 0.3) {
            dq.push_back(grid[i]);
            fq.push_back(value[i]);
            sq.push_back(error[i]);
        }
        if (grid[i] >= 3.5 && grid[i] <= 6.0 && value[i] > 0.0) {
            dt.push_back(grid[i]);
            ft.push_back(value[i]);
            st.push_back(error[i]);
        }
    }
    if (dq.size() >= 2) {
        const QuadraticFit fit = fit_quadratic_coefficient(dq, fq, sq);
        std::cout << strf(
            "small-separation fit over [0.01, 0.3]: F ~ c d^2 with c = %.4f +/- %.4f "
            "(reference branch 4.49)\n",
            fit.coefficient, fit.std_error);
    } else {
        std::cout << "small-separation fit skipped: fewer than 2 grid points in [0.01, 0.3]\n";
    }
    if (dt.size() >= 2) {
        const LogLinearFit fit = fit_log_linear(dt, ft, st);
        std::cout << strf(
            "large-separation fit over [3.5, 6]: F ~ A exp(-d/L) with L = %.4f "
            "(reference branch 1.3)\n",
            -1.0 / fit.slope);
    } else {
        std::cout << "large-separation fit skipped: fewer than 2 grid points in [3.5, 6]\n";
    }

    std::vector<Series> series;
    series.push_back({"F(d)", grid, value, false});
    Series quad_branch{"4.49 d^2", {}, {}, true};
    Series tail_branch{"2.1 exp(-(d-3.5)/1.3)", {}, {}, true};
    for (double d : grid) {
        if (d <= 1.2) {
            quad_branch.x.push_back(d);
            quad_branch.y.push_back(4.49 * d * d);
        }
        if (d >= 2.5) {
            tail_branch.x.push_back(d);
            tail_branch.y.push_back(2.1 * std::exp(-(d - 3.5) / 1.3));
        }
    }
    if (quad_branch.x.size() >= 2) series.push_back(quad_branch);
    if (tail_branch.x.size() >= 2) series.push_back(tail_branch);
    PlotOptions plot;
    plot.title = "Feedback integral F(d)";
    plot.x_label = "d (separation / 2 r_C)";
    plot.y_label = "F";
    write_line_plot(o.common.path("ftilde.svg"), series, plot);

    std::cout << strf("ftilde: wrote ftilde.csv (%zu rows) and ftilde.svg\n", grid.size());
    return 0;
}

// ---------------------------------------------------------------------------
// decoherence
// ---------------------------------------------------------------------------

struct DecoherenceOpts {
    CommonOpts common;
    std::string models = "gpsl,gpsl-pert,td-dp";
    double gamma_csl = 0.0;
    bool gamma_csl_set = false;
    double mass = 1.0;
    double feedback_ratio = 0.1;
    double d_min = 0.05;
    double d_max = 6.0;
    double step = 0.05;
    std::uint64_t samples = 200000;
};

std::string model_token(Model m) {
    switch (m) {
        case Model::GPSL_exact: return "gpsl";
        case Model::GPSL_perturbative: return "gpsl-pert";
        case Model::TD_CSL: return "td-csl";
        case Model::TD_DP: return "td-dp";
    }
    return "?";
}

int run_decoherence(DecoherenceOpts& o) {
    o.common.finalize();
    if (!(o.d_min >= 0.0)) throw ConfigError("--d-min must be >= 0");
    if (!(o.mass > 0.0)) throw ConfigError("--mass must be > 0");
    if (!(o.feedback_ratio > 0.0)) throw ConfigError("--feedback-ratio must be > 0");

    std::vector<Model> models;
    for (const std::string& token : split(o.models, ',')) {
        if (token.empty()) continue;
        if (token == "gpsl") models.push_back(Model::GPSL_exact);
        else if (token == "gpsl-pert") models.push_back(Model::GPSL_perturbative);
        else if (token == "td-csl") models.push_back(Model::TD_CSL);
        else if (token == "td-dp") models.push_back(Model::TD_DP);
        else throw ConfigError("unknown model '" + token +
                               "' (known: gpsl, gpsl-pert, td-csl, td-dp)");
    }
    if (models.empty()) throw ConfigError("--models must select at least one model");
    const bool wants_csl =
        std::find(models.begin(), models.end(), Model::TD_CSL) != models.end();
    if (wants_csl && !o.gamma_csl_set)
        throw ConfigError("model td-csl requires --gamma-csl");
    TDParams td;
    if (o.gamma_csl_set) {
        td.gamma_csl = o.gamma_csl;
        td.validate();
    }

    // Unit-free parameter set with G chosen so that r_p / r_C equals the
    // requested feedback ratio for this particle mass.
    ModelParams params = ModelParams::unit_free();
    params.constants.G = o.feedback_ratio / o.mass;
    ParticleSpec particle{o.mass};
    const std::vector<double> grid = make_grid(o.d_min, o.d_max, o.step);

    Meta base_meta("decoherence");
    base_meta.add("models", o.models)
        .add("mass", o.mass)
        .add("feedback_ratio", o.feedback_ratio)
        .add("d_min", o.d_min)
        .add("d_max", o.d_max)
        .add("step", o.step)
        .add("samples", o.samples)
        .add("seed", o.common.seed);
    if (o.gamma_csl_set) base_meta.add("gamma_csl", o.gamma_csl);

    std::vector<Series> series;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const Model model = models[mi];
        std::vector<double> rate(grid.size()), err(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            DecoherencePoint p;
            switch (model) {
                case Model::GPSL_exact:
                    p = gamma_gpsl_exact(grid[i], particle, params,
                                         o.common.quad(mi * grid.size() + i, o.samples));
                    break;
                case Model::GPSL_perturbative:
                    p = gamma_gpsl_perturbative(grid[i], particle, params);
                    break;
                case Model::TD_DP:
                    p = gamma_td_dp(grid[i], particle, params);
                    break;
                case Model::TD_CSL:
                    p = gamma_td_csl(grid[i], particle, params, td);
                    break;
            }
            rate[i] = p.rate;
            err[i] = p.error;
        }
        std::string token = model_token(model);
        std::string file = "decoherence_" + token + ".csv";
        std::replace(file.begin(), file.end(), '-', '_');
        Meta meta = base_meta;
        meta.add("model", token);
        CsvWriter csv(o.common.path(file), meta.str());
        csv.header({"d_tilde", "rate", "std_error"});
        for (std::size_t i = 0; i < grid.size(); ++i)
            csv.row({csv_num(grid[i]), csv_num(rate[i]), csv_num(err[i])});
        series.push_back({token, grid, rate, false});
        std::cout << "decoherence: wrote " << file << "\n";
    }

    PlotOptions plot;
    plot.title = "Two-site decoherence rates";
    plot.x_label = "d (separation / 2 r_C)";
    plot.y_label = "rate";
    write_line_plot(o.common.path("decoherence.svg"), series, plot);

    // Large-separation limiting values per selected model.
    CsvWriter limits(o.common.path("decoherence_limits.csv"), base_meta.str());
    limits.header({"model", "quantity", "value"});
    const double csl_collapse_plateau =
        o.gamma_csl_set
            ? td.gamma_csl * std::pow(4.0 * M_PI * params.r_C * params.r_C, -1.5) *
                  (o.mass / params.constants.m0) * (o.mass / params.constants.m0)
            : 0.0;
    const double csl_tail_slope =
        o.gamma_csl_set
            ? M_PI * params.r_C / td.gamma_csl *
                  std::pow(params.constants.m0 * o.mass * params.constants.G /
                               params.constants.hbar,
                           2.0)
            : 0.0;
    for (Model model : models) {
        switch (model) {
            case Model::GPSL_exact:
            case Model::GPSL_perturbative:
                limits.row({model_token(model), "plateau",
                            csv_num(gamma_gpsl_limit(particle, params))});
                break;
            case Model::TD_DP:
                limits.row({model_token(model), "plateau",
                            csv_num(gamma_td_dp_limit(particle, params))});
                break;
            case Model::TD_CSL:
                limits.row({"td-csl", "collapse_plateau", csv_num(csl_collapse_plateau)});
                limits.row({"td-csl", "tail_slope_per_d", csv_num(csl_tail_slope)});
                break;
        }
    }
    std::cout << "decoherence: wrote decoherence.svg and decoherence_limits.csv\n";

    int rc = 0;
    if (wants_csl) {
        if (o.d_max >= 5.0) {
            const double hi = gamma_td_csl(o.d_max, particle, params, td).rate;
            const double lo = gamma_td_csl(o.d_max - 1.0, particle, params, td).rate;
            const double secant = hi - lo;
            const double ratio = secant / csl_tail_slope;
            const bool pass = std::abs(ratio - 1.0) <= 0.02;
            std::cout << strf(
                "td-csl tail-slope check over [%g, %g]: secant %.6g vs asymptote %.6g "
                "(ratio %.4f, bound 1 +/- 0.02) -> %s\n",
                o.d_max - 1.0, o.d_max, secant, csl_tail_slope, ratio,
                pass ? "PASS" : "FAIL");
            if (!pass) rc = 4;
        } else {
            std::cout << "td-csl tail-slope check skipped: needs --d-max >= 5\n";
        }
    }
    return rc;
}

// ---------------------------------------------------------------------------
// sphere
// ---------------------------------------------------------------------------

struct SphereOpts {
    CommonOpts common;
    std::string mode = "kernels";
    double d_min = 0.0;
    double d_max = 1.5;
    double step = 0.01;
    double mass = 1.0;
    double radius = 100.0;
    double gamma_csl = 0.0;
    bool gamma_csl_set = false;
    double mu0 = 100.0;
    double gamma_si = 1e-9;
};

int run_sphere(SphereOpts& o) {
    o.common.finalize();
    if (!(o.d_min >= 0.0)) throw ConfigError("--d-min must be >= 0");
    if (o.mode != "kernels" && o.mode != "rates")
        throw ConfigError("--mode must be 'kernels' or 'rates'");

    // Branch continuity at the ball-overlap boundary x = 1, checked before
    // any plotting: both one-sided evaluations must agree to 1e-12.
    {
        const double left = std::nextafter(1.0, 0.0);
        const struct {
            const char* name;
            double (*fn)(double);
        } kernels[] = {{"K_C", k_c},
                       {"K_G(collapse-feedback)", k_g_gpsl},
                       {"K_G(dp)", k_g_dp},
                       {"K_G(csl)", k_g_csl},
                       {"F_Sp", f_sp}};
        for (const auto& k : kernels) {
            const double gap = std::abs(k.fn(left) - k.fn(1.0));
            if (!(gap <= 1e-12)) {
                std::cout << strf("sphere: branch continuity FAIL for %s at x = 1: gap %.3e\n",
                                  k.name, gap);
                return 4;
            }
        }
        std::cout << "sphere: branch continuity at x = 1 verified for all five kernels\n";
    }

    ModelParams params = ModelParams::unit_free();
    ModelParams params_si;  // SI constants for the balance-radius report
    params_si.constants = PhysicalConstants::si();
    params_si.gamma = o.gamma_si;
    params_si.r_C = 1e-7;
    std::cout << strf(
        "sphere: collapse/gravity balance radius %.4g m at density %.4g kg/m^3, "
        "collapse rate %.4g 1/s\n",
        balance_radius(o.mu0, params_si), o.mu0, o.gamma_si);

    const std::vector<double> grid = make_grid(o.d_min, o.d_max, o.step);

    if (o.mode == "kernels") {
        Meta meta("sphere");
        meta.add("mode", o.mode)
            .add("d_min", o.d_min)
            .add("d_max", o.d_max)
            .add("step", o.step)
            .add("seed", o.common.seed);
        CsvWriter csv(o.common.path("sphere_kernels.csv"), meta.str());
        csv.header({"x", "k_c", "f_sp", "k_g_gpsl", "k_g_dp", "k_g_csl"});
        std::vector<double> g1(grid.size()), g2(grid.size()), g3(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid[i];
            g1[i] = k_g_gpsl(x);
            g2[i] = k_g_dp(x);
            g3[i] = k_g_csl(x);
            csv.row({csv_num(x), csv_num(k_c(x)), csv_num(f_sp(x)), csv_num(g1[i]),
                     csv_num(g2[i]), csv_num(g3[i])});
        }
        PlotOptions plot;
        plot.title = "Sphere gravitational kernels";
        plot.x_label = "x = D / 2R";
        plot.y_label = "K_G";
        write_line_plot(o.common.path("sphere.svg"),
                        {{"collapse-feedback", grid, g1, false},
                         {"dp", grid, g2, false},
                         {"csl", grid, g3, false}},
                        plot);
        std::cout << strf("sphere: wrote sphere_kernels.csv (%zu rows) and sphere.svg\n",
                          grid.size());
        return 0;
    }

    // rates mode
    SphereSpec sphere{o.mass, o.radius};
    sphere.validate();
    TDParams td;
    if (o.gamma_csl_set) {
        td.gamma_csl = o.gamma_csl;
        td.validate();
    }
    Meta meta("sphere");
    meta.add("mode", o.mode)
        .add("d_min", o.d_min)
        .add("d_max", o.d_max)
        .add("step", o.step)
        .add("mass", o.mass)
        .add("radius", o.radius)
        .add("seed", o.common.seed);
    if (o.gamma_csl_set) meta.add("gamma_csl", o.gamma_csl);
    CsvWriter csv(o.common.path("sphere_rates.csv"), meta.str());
    std::vector<std::string> cols = {"x", "d", "gamma_gpsl", "gamma_dp"};
    if (o.gamma_csl_set) cols.push_back("gamma_csl");
    csv.header(cols);
    std::vector<double> rg(grid.size()), rd(grid.size()), rc_(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double D = 2.0 * o.radius * grid[i];
        rg[i] = gamma_sphere_gpsl(D, sphere, params).rate;
        rd[i] = gamma_sphere_dp(D, sphere, params).rate;
        std::vector<std::string> row = {csv_num(grid[i]), csv_num(D), csv_num(rg[i]),
                                        csv_num(rd[i])};
        if (o.gamma_csl_set) {
            rc_[i] = gamma_sphere_csl(D, sphere, params, td).rate;
            row.push_back(csv_num(rc_[i]));
        }
        csv.row(row);
    }
    PlotOptions plot;
    plot.title = "Sphere decoherence rates";
    plot.x_label = "x = D / 2R";
    plot.y_label = "rate";
    plot.log_y = true;
    std::vector<Series> series = {{"collapse-feedback", grid, rg, false},
                                  {"dp", grid, rd, false}};
    if (o.gamma_csl_set) series.push_back({"csl", grid, rc_, false});
    write_line_plot(o.common.path("sphere_rates.svg"), series, plot);
    std::cout << strf("sphere: wrote sphere_rates.csv (%zu rows) and sphere_rates.svg\n",
                      grid.size());
    return 0;
}

// ---------------------------------------------------------------------------
// force
// ---------------------------------------------------------------------------

struct ForceOpts {
    CommonOpts common;
    double d_min = 0.05;
    double d_max = 10.0;
    double step = 0.05;
};

int run_force(ForceOpts& o) {
    o.common.finalize();
    if (!(o.d_min >= 0.0)) throw ConfigError("--d-min must be >= 0");
    const std::vector<double> grid = make_grid(o.d_min, o.d_max, o.step);
    QuadratureConfig quad;
    quad.threads = o.common.threads;

    Meta meta("force");
    meta.add("d_min", o.d_min).add("d_max", o.d_max).add("step", o.step).add(
        "seed", o.common.seed);
    CsvWriter csv(o.common.path("force.csv"), meta.str());
    csv.header({"d_r", "f_tilde_g", "error"});
    std::vector<double> value(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const IntegralResult r = f_tilde_g(grid[i], quad);
        if (!std::isfinite(r.value))
            throw ConvergenceError(strf("force integral failed at d_r = %g", grid[i]));
        value[i] = r.value;
        csv.row({csv_num(grid[i]), csv_num(r.value), csv_num(r.error_estimate)});
    }

    std::vector<Series> series;
    series.push_back({"F_G(d_r)", grid, value, false});
    Series lin{"4/(3 pi^2) d_r", {}, {}, true};
    Series inv{"1/(2 d_r^2)", {}, {}, true};
    for (double d : grid) {
        if (d <= 0.7) {
            lin.x.push_back(d);
            lin.y.push_back(4.0 / (3.0 * M_PI * M_PI) * d);
        }
        if (d >= 2.0) {
            inv.x.push_back(d);
            inv.y.push_back(0.5 / (d * d));
        }
    }
    if (lin.x.size() >= 2) series.push_back(lin);
    if (inv.x.size() >= 2) series.push_back(inv);
    PlotOptions plot;
    plot.title = "Mean gravitational force integral";
    plot.x_label = "d_r (separation / r_C)";
    plot.y_label = "F_G";
    plot.log_y = true;
    write_line_plot(o.common.path("force.svg"), series, plot);
    std::cout << strf("force: wrote force.csv (%zu rows) and force.svg\n", grid.size());

    // Asymptote agreement at the canonical anchor points.
    const double f_small = f_tilde_g(0.05, quad).value;
    const double f_large = f_tilde_g(10.0, quad).value;
    const double ref_small = 4.0 / (3.0 * M_PI * M_PI) * 0.05;
    const double ref_large = 0.5 / 100.0;
    std::cout << strf("force: F_G(0.05) = %.6g vs linear branch %.6g (deviation %.2f%%)\n",
                      f_small, ref_small, 100.0 * std::abs(f_small / ref_small - 1.0));
    std::cout << strf(
        "force: F_G(10) = %.6g vs inverse-square branch %.6g (deviation %.2f%%)\n", f_large,
        ref_large, 100.0 * std::abs(f_large / ref_large - 1.0));

    // Momentum conservation: the mean force on k from j must be exactly the
    // negative of the mean force on j from k (skew pair, unequal masses).
    ModelParams params = ModelParams::unit_free();
    PairConfiguration pair{2.0, 3.0, Vec3{0.0, 0.0, 0.0}, Vec3{1.0, 2.0, 2.0}};
    const ForceVector on_k = average_force(pair, params, quad);
    const ForceVector on_j = average_force(pair.swapped(), params, quad);
    const Vec3 total = on_k.components + on_j.components;
    const double rel = total.norm() / on_k.components.norm();
    const bool pass = rel <= 1e-12;
    std::cout << strf(
        "force: antisymmetry |F_kj + F_jk| / |F_kj| = %.3e (bound 1e-12) -> %s\n", rel,
        pass ? "PASS" : "FAIL");
    return pass ? 0 : 4;
}

// ---------------------------------------------------------------------------
// covariance
// ---------------------------------------------------------------------------

struct CovarianceOpts {
    CommonOpts common;
    std::string sources = "1:0,0,0";
    std::string separations = "0,0.5,1,2,4";
    double gamma_csl = 1.0;
    std::uint64_t samples = 200000;
};

int run_covariance(CovarianceOpts& o) {
    o.common.finalize();
    MassDensityField field;
    for (const std::string& part : split(o.sources, ';')) {
        if (part.empty()) continue;
        const std::size_t colon = part.find(':');
        if (colon == std::string::npos)
            throw ConfigError("--sources entries must look like mass:x,y,z");
        const double mass = parse_double(trim(part.substr(0, colon)), "--sources");
        const std::vector<std::string> xyz = split(part.substr(colon + 1), ',');
        if (xyz.size() != 3)
            throw ConfigError("--sources entries must have three coordinates");
        field.point_masses.push_back(
            {mass, Vec3{parse_double(xyz[0], "--sources"), parse_double(xyz[1], "--sources"),
                        parse_double(xyz[2], "--sources")}});
    }
    field.validate();
    std::vector<double> seps;
    for (const std::string& s : split(o.separations, ','))
        if (!s.empty()) seps.push_back(parse_double(s, "--separations"));
    if (seps.empty()) throw ConfigError("--separations must list at least one value");

    ModelParams params = ModelParams::unit_free();
    TDParams td{o.gamma_csl};
    td.validate();

    Meta meta("covariance");
    meta.add("sources", o.sources)
        .add("separations", o.separations)
        .add("gamma_csl", o.gamma_csl)
        .add("samples", o.samples)
        .add("seed", o.common.seed);
    CsvWriter csv(o.common.path("covariance.csv"), meta.str());
    csv.header({"separation", "gpsl_value", "gpsl_std_error", "td_dp_value",
                "td_dp_divergent", "td_csl_value", "td_csl_divergent"});

    std::cout << strf("%-12s %-24s %-16s %-16s\n", "separation", "gpsl", "td-dp", "td-csl");
    for (std::size_t i = 0; i < seps.size(); ++i) {
        const Vec3 x{0.0, 0.0, 0.0};
        const Vec3 y{0.0, 0.0, seps[i]};
        const CovarianceResult g =
            gpsl_field_covariance(x, y, field, params, o.common.quad(i, o.samples));
        const CovarianceResult dp = td_dp_covariance(x, y, params);
        const CovarianceResult cs = td_csl_covariance(x, y, params, td);
        csv.row({csv_num(seps[i]), g.divergent ? "" : csv_num(g.value),
                 g.divergent ? "" : csv_num(g.error), dp.divergent ? "" : csv_num(dp.value),
                 dp.divergent ? "1" : "0", cs.divergent ? "" : csv_num(cs.value),
                 cs.divergent ? "1" : "0"});
        std::cout << strf("%-12g %-24s %-16s %-16s\n", seps[i],
                          g.divergent ? "divergent"
                                      : strf("%.6g +/- %.2g", g.value, g.error).c_str(),
                          dp.divergent ? "divergent" : strf("%.6g", dp.value).c_str(),
                          cs.divergent ? "divergent" : strf("%.6g", cs.value).c_str());
    }
    std::cout << "covariance: wrote covariance.csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
    CommonOpts common;
    double d_tilde = 1.0;
    double mass = 1.0;
    double feedback_ratio = 0.1;
    std::uint64_t trajectories = 10000;
    double dt = 0.0;  // 0 = automatic
    double t_final = 6.0;
    bool gravity = true;
    std::uint64_t batches = 16;
    std::uint64_t analytic_samples = 1000000;
};

int run_simulate(SimulateOpts& o) {
    o.common.finalize();
    if (!(o.mass > 0.0)) throw ConfigError("--mass must be > 0");
    if (!(o.feedback_ratio > 0.0)) throw ConfigError("--feedback-ratio must be > 0");
    if (o.batches < 2) throw ConfigError("--batches must be >= 2");

    ModelParams params = ModelParams::unit_free();
    params.constants.G = o.feedback_ratio / o.mass;
    ParticleSpec particle{o.mass};
    TrajectoryConfig cfg;
    cfg.particle = particle;
    cfg.params = params;
    cfg.dt = o.dt > 0.0 ? o.dt : default_dt(particle, params);
    cfg.t_final = o.t_final;
    cfg.n_trajectories = o.trajectories;
    cfg.seed = o.common.seed;
    cfg.gravity_on = o.gravity;
    cfg.validate();
    const LatticeState initial = two_site_superposition(o.d_tilde, params);

    const EnsembleResult ensemble = run_ensemble(initial, cfg);

    Meta meta("simulate");
    meta.add("d_tilde", o.d_tilde)
        .add("mass", o.mass)
        .add("feedback_ratio", o.feedback_ratio)
        .add("trajectories", o.trajectories)
        .add("dt", cfg.dt)
        .add("t_final", o.t_final)
        .add("gravity", std::string(o.gravity ? "true" : "false"))
        .add("batches", o.batches)
        .add("analytic_samples", o.analytic_samples)
        .add("seed", o.common.seed);
    CsvWriter csv(o.common.path("simulate.csv"), meta.str());
    csv.header({"time", "re_rho12", "im_rho12", "se_re", "se_im"});
    std::vector<double> mag(ensemble.times.size());
    for (std::size_t t = 0; t < ensemble.times.size(); ++t) {
        const std::complex<double> rho = ensemble.rho_mean(t, 0, 1);
        const std::complex<double> se = ensemble.rho_se(t, 0, 1);
        mag[t] = std::abs(rho);
        csv.row({csv_num(ensemble.times[t]), csv_num(rho.real()), csv_num(rho.imag()),
                 csv_num(se.real()), csv_num(se.imag())});
    }

    // Analytic decay rate of the off-diagonal element for these parameters.
    DecoherencePoint analytic;
    if (o.gravity) {
        QuadratureConfig quad = o.common.quad(0x5Au, o.analytic_samples);
        analytic = gamma_gpsl_exact(o.d_tilde, particle, params, quad);
    } else {
        analytic.rate = params.gamma * o.mass / params.constants.m0 *
                        (1.0 - std::exp(-0.5 * o.d_tilde * o.d_tilde));
        analytic.error = 0.0;
    }

    std::vector<double> overlay(ensemble.times.size());
    for (std::size_t t = 0; t < ensemble.times.size(); ++t)
        overlay[t] = 0.5 * std::exp(-analytic.rate * ensemble.times[t]);
    PlotOptions plot;
    plot.title = "Off-diagonal coherence decay";
    plot.x_label = "time";
    plot.y_label = "|rho_12|";
    plot.log_y = true;
    write_line_plot(o.common.path("simulate.svg"),
                    {{"ensemble |rho_12|", ensemble.times, mag, false},
                     {"0.5 exp(-rate t)", ensemble.times, overlay, true}},
                    plot);

    const BatchedRate fitted = batched_decay_rate(initial, cfg, o.batches);
    const double combined =
        std::sqrt(fitted.std_error * fitted.std_error + analytic.error * analytic.error);
    const double pull = std::abs(fitted.rate - analytic.rate) / combined;
    const bool pass = pull <= 3.0;
    std::cout << strf("simulate: %llu trajectories (%llu failed), dt = %g, t_final = %g\n",
                      static_cast<unsigned long long>(ensemble.n_trajectories),
                      static_cast<unsigned long long>(ensemble.failed_trajectories), cfg.dt,
                      o.t_final);
    std::cout << strf("simulate: fitted rate %.6g +/- %.2g (%llu batches)\n", fitted.rate,
                      fitted.std_error, static_cast<unsigned long long>(fitted.n_batches));
    std::cout << strf("simulate: analytic rate %.6g +/- %.2g\n", analytic.rate,
                      analytic.error);
    std::cout << strf("simulate: deviation %.2f combined sigma (gate 3) -> %s\n", pull,
                      pass ? "PASS" : "FAIL");
    std::cout << "simulate: wrote simulate.csv and simulate.svg\n";
    return pass ? 0 : 4;
}

// ---------------------------------------------------------------------------
// app assembly
// ---------------------------------------------------------------------------

/// Pre-scan for --config, validate its keys against the chosen subcommand
/// and splice the file's entries in as synthetic arguments right after the
/// subcommand token, so that explicit flags (parsed later, take-last
/// policy) override file values.
std::vector<std::string> args_with_config(int argc, char** argv,
                                          const std::map<std::string, CLI::App*>& subs) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    CLI::App* sub = nullptr;
    std::size_t sub_pos = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (a.rfind("--config=", 0) == 0) {
            config_path = a.substr(9);
        } else if (sub == nullptr) {
            const auto it = subs.find(a);
            if (it != subs.end()) {
                sub = it->second;
                sub_pos = i;
            }
        }
    }
    if (config_path.empty()) return args;
    if (sub == nullptr) throw ConfigError("--config requires a subcommand");
    std::vector<std::string> spliced;
    for (const auto& [key, value] : parse_config_file(config_path)) {
        if (key == "config")
            throw ConfigError("config files cannot set 'config'");
        if (sub->get_option_no_throw("--" + key) == nullptr)
            throw ConfigError("unknown config key '" + key + "' for command '" +
                              sub->get_name() + "'");
        spliced.push_back("--" + key);
        spliced.push_back(value);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, spliced.begin(),
                spliced.end());
    return args;
}

int run(int argc, char** argv) {
    CLI::App app{
        "Spontaneous-localization decoherence toolkit: curves, rates, forces, "
        "covariances and jump-trajectory ensembles, written as CSV + SVG."};
    app.name("gpsl");
    app.require_subcommand(1);
    const auto take_last = CLI::MultiOptionPolicy::TakeLast;

    FtildeOpts ft;
    CLI::App* c_ft = app.add_subcommand(
        "ftilde", "feedback integral F(d) curve with both fit branches");
    add_common(c_ft, ft.common);
    c_ft->add_option("--d-min", ft.d_min, "first separation")
        ->capture_default_str()->multi_option_policy(take_last);
    c_ft->add_option("--d-max", ft.d_max, "last separation")
        ->capture_default_str()->multi_option_policy(take_last);
    c_ft->add_option("--step", ft.step, "grid spacing")
        ->capture_default_str()->multi_option_policy(take_last);
    c_ft->add_option("--method", ft.method, "quadrature | mc")
        ->capture_default_str()->multi_option_policy(take_last);
    c_ft->add_option("--samples", ft.samples, "MC samples per point")
        ->capture_default_str()->multi_option_policy(take_last);

    DecoherenceOpts dc;
    CLI::App* c_dc = app.add_subcommand(
        "decoherence", "two-site decoherence rate curves for the selected models");
    add_common(c_dc, dc.common);
    c_dc->add_option("--models", dc.models,
                     "comma list of gpsl, gpsl-pert, td-csl, td-dp")
        ->capture_default_str()->multi_option_policy(take_last);
    CLI::Option* dc_gcsl =
        c_dc->add_option("--gamma-csl", dc.gamma_csl,
                         "CSL rate constant (required by td-csl)")
            ->multi_option_policy(take_last);
    c_dc->add_option("--mass", dc.mass, "particle mass in reference-mass units")
        ->capture_default_str()->multi_option_policy(take_last);
    c_dc->add_option("--feedback-ratio", dc.feedback_ratio,
                     "r_p / r_C for this particle (fixes G)")
        ->capture_default_str()->multi_option_policy(take_last);
    c_dc->add_option("--d-min", dc.d_min, "first separation")
        ->capture_default_str()->multi_option_policy(take_last);
    c_dc->add_option("--d-max", dc.d_max, "last separation")
        ->capture_default_str()->multi_option_policy(take_last);
    c_dc->add_option("--step", dc.step, "grid spacing")
        ->capture_default_str()->multi_option_policy(take_last);
    c_dc->add_option("--samples", dc.samples, "MC samples per exact-rate point")
        ->capture_default_str()->multi_option_policy(take_last);

    SphereOpts sp;
    CLI::App* c_sp = app.add_subcommand(
        "sphere", "rigid-sphere kernels or full rates, plus the balance-radius report");
    add_common(c_sp, sp.common);
    c_sp->add_option("--mode", sp.mode, "kernels | rates")
        ->capture_default_str()->multi_option_policy(take_last);
    c_sp->add_option("--d-min", sp.d_min, "first x = D/2R")
        ->capture_default_str()->multi_option_policy(take_last);
    c_sp->add_option("--d-max", sp.d_max, "last x = D/2R")
        ->capture_default_str()->multi_option_policy(take_last);
    c_sp->add_option("--step", sp.step, "grid spacing in x")
        ->capture_default_str()->multi_option_policy(take_last);
    c_sp->add_option("--mass", sp.mass, "sphere mass (rates mode)")
        ->capture_default_str()->multi_option_policy(take_last);
    c_sp->add_option("--radius", sp.radius, "sphere radius in r_C units (rates mode)")
        ->capture_default_str()->multi_option_policy(take_last);
    CLI::Option* sp_gcsl =
        c_sp->add_option("--gamma-csl", sp.gamma_csl,
                         "CSL rate constant; adds the csl column in rates mode")
            ->multi_option_policy(take_last);
    c_sp->add_option("--mu0", sp.mu0, "density for the balance-radius report, kg/m^3")
        ->capture_default_str()->multi_option_policy(take_last);
    c_sp->add_option("--gamma-si", sp.gamma_si,
                     "collapse rate for the balance-radius report, 1/s")
        ->capture_default_str()->multi_option_policy(take_last);

    ForceOpts fo;
    CLI::App* c_fo = app.add_subcommand(
        "force", "mean gravitational force curve with asymptote overlays");
    add_common(c_fo, fo.common);
    c_fo->add_option("--d-min", fo.d_min, "first separation in r_C units")
        ->capture_default_str()->multi_option_policy(take_last);
    c_fo->add_option("--d-max", fo.d_max, "last separation in r_C units")
        ->capture_default_str()->multi_option_policy(take_last);
    c_fo->add_option("--step", fo.step, "grid spacing")
        ->capture_default_str()->multi_option_policy(take_last);

    CovarianceOpts cv;
    CLI::App* c_cv = app.add_subcommand(
        "covariance", "potential-noise covariance table with divergence flags");
    add_common(c_cv, cv.common);
    c_cv->add_option("--sources", cv.sources, "mass:x,y,z list separated by ';'")
        ->capture_default_str()->multi_option_policy(take_last);
    c_cv->add_option("--separations", cv.separations, "comma list of |x - y| values")
        ->capture_default_str()->multi_option_policy(take_last);
    c_cv->add_option("--gamma-csl", cv.gamma_csl, "CSL rate constant")
        ->capture_default_str()->multi_option_policy(take_last);
    c_cv->add_option("--samples", cv.samples, "MC samples per separation")
        ->capture_default_str()->multi_option_policy(take_last);

    SimulateOpts si;
    CLI::App* c_si = app.add_subcommand(
        "simulate", "jump-trajectory ensemble vs the analytic decay rate");
    add_common(c_si, si.common);
    c_si->add_option("--d-tilde", si.d_tilde, "two-site separation / 2 r_C")
        ->capture_default_str()->multi_option_policy(take_last);
    c_si->add_option("--mass", si.mass, "particle mass in reference-mass units")
        ->capture_default_str()->multi_option_policy(take_last);
    c_si->add_option("--feedback-ratio", si.feedback_ratio,
                     "r_p / r_C for this particle (fixes G)")
        ->capture_default_str()->multi_option_policy(take_last);
    c_si->add_option("--traj", si.trajectories, "number of trajectories")
        ->capture_default_str()->multi_option_policy(take_last);
    c_si->add_option("--dt", si.dt, "step size (0 = automatic)")
        ->capture_default_str()->multi_option_policy(take_last);
    c_si->add_option("--t-final", si.t_final, "simulated time span")
        ->capture_default_str()->multi_option_policy(take_last);
    c_si->add_option("--gravity", si.gravity, "apply the feedback phase (true/false)")
        ->capture_default_str()->multi_option_policy(take_last);
    c_si->add_option("--batches", si.batches, "independent sub-ensembles for the rate fit")
        ->capture_default_str()->multi_option_policy(take_last);
    c_si->add_option("--analytic-samples", si.analytic_samples,
                     "MC samples for the analytic reference rate")
        ->capture_default_str()->multi_option_policy(take_last);

    int rc = 0;
    c_ft->callback([&] { rc = run_ftilde(ft); });
    c_dc->callback([&] {
        dc.gamma_csl_set = dc_gcsl->count() > 0;
        rc = run_decoherence(dc);
    });
    c_sp->callback([&] {
        sp.gamma_csl_set = sp_gcsl->count() > 0;
        rc = run_sphere(sp);
    });
    c_fo->callback([&] { rc = run_force(fo); });
    c_cv->callback([&] { rc = run_covariance(cv); });
    c_si->callback([&] { rc = run_simulate(si); });

    const std::map<std::string, CLI::App*> subs = {
        {"ftilde", c_ft},   {"decoherence", c_dc}, {"sphere", c_sp},
        {"force", c_fo},    {"covariance", c_cv},  {"simulate", c_si}};

    try {
        std::vector<std::string> args = args_with_config(argc, argv, subs);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}

}  // namespace
}  // namespace gpsl::cli

int main(int argc, char** argv) {
    try {
        return gpsl::cli::run(argc, argv);
    } catch (const gpsl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gpsl::ValidityError& e) {
        std::cerr << "validity error: " << e.what() << "\n";
        return 2;
    } catch (const gpsl::DomainError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const gpsl::ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const gpsl::IntegrandError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
