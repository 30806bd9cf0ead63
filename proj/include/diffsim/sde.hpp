#pragma once

#include "diffsim/dist_transforms.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace diffsim {

/// Scalar Ito diffusion dX = mu(X,t) dt + sigma(X,t) dB with X_0 = x0.
struct SdeModel {
    using StateFn = std::function<double(double x, double t)>;
    /// (x, delta, eps) -> exact transition over delta driven by eps ~ N(0,1).
    using ExactStep = std::function<double(double x, double delta, double eps)>;

    std::string name;
    StateFn drift;
    StateFn diffusion;
    /// d sigma / d x.
    StateFn diffusion_x;
    std::vector<std::pair<std::string, double>> params;
    double x0 = 0.0;
    ExactStep exact_step;

    bool has_exact_step() const { return static_cast<bool>(exact_step); }
    double param(const std::string& key) const;
};

struct VasicekParams {
    double a;
    double b;
    double r0;
    double sigma;

    /// Throws std::invalid_argument unless a > 0 and sigma >= 0.
    void validate() const;
};

struct CirParams {
    double a;
    double b;
    double r0;
    double sigma;

    void validate() const;
    /// 2ab >= sigma^2: the origin is unattainable.
    bool feller() const { return 2.0 * a * b >= sigma * sigma; }
};

struct GbmParams {
    double s0;
    /// Drift; the risk-free rate under the pricing measure.
    double mu;
    double sigma;

    void validate() const;
};

/// dr = a(b - r) dt + sigma dB, with its exact Gaussian transition.
SdeModel vasicek_model(const VasicekParams& p);

/// dr = a(b - r) dt + sigma sqrt(r) dB. Drift and diffusion are evaluated at
/// max(r, 0) (full truncation), so Euler/Milstein paths stay well defined
/// after an excursion below zero. No exact step.
SdeModel cir_model(const CirParams& p);

/// dS = mu S dt + sigma S dB, with its exact lognormal transition.
SdeModel gbm_model(const GbmParams& p);

/// dX = mu dt + sigma dB; Euler is exact for it.
SdeModel arithmetic_bm_model(double x0, double mu, double sigma);

double euler_step(const SdeModel& model, double x, double t, double delta, double eps);

/// Euler plus 0.5 * sigma_x * sigma * delta * (eps^2 - 1). Returns the Euler
/// value bit for bit when sigma_x vanishes at (x, t).
double milstein_step(const SdeModel& model, double x, double t, double delta, double eps);

/// r e^{-a delta} + b (1 - e^{-a delta}) + sigma sqrt((1 - e^{-2 a delta}) / (2a)) eps.
double vasicek_exact_step(const VasicekParams& p, double r, double delta, double eps);

/// s exp((mu - sigma^2/2) delta + sigma sqrt(delta) eps).
double gbm_exact_step(const GbmParams& p, double s, double delta, double eps);

enum class Scheme { exact, euler, milstein };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

/// One step of the chosen scheme. Throws std::invalid_argument for
/// Scheme::exact on a model without an exact step.
double scheme_step(const SdeModel& model, Scheme scheme, double x, double t, double delta, double eps);

/// Uniform grid t_k = k * delta, k = 0..steps. Time is addressed by step index.
struct TimeGrid {
    double delta = 1.0;
    std::size_t steps = 0;

    /// Throws std::invalid_argument unless horizon / delta is an integer
    /// (relative tolerance 1e-9) and delta > 0.
    static TimeGrid make(double delta, double horizon);

    double time(std::size_t k) const { return static_cast<double>(k) * delta; }
    double horizon() const { return time(steps); }
    std::size_t points() const { return steps + 1; }
};

/// n_paths trajectories on a common grid, stored path-major.
class PathEnsemble {
public:
    PathEnsemble(TimeGrid grid, std::size_t n_paths);

    const TimeGrid& grid() const { return grid_; }
    std::size_t n_paths() const { return n_paths_; }

    std::span<const double> path(std::size_t i) const;
    std::span<double> path(std::size_t i);
    double at(std::size_t i, std::size_t k) const { return values_[i * grid_.points() + k]; }
    double& at(std::size_t i, std::size_t k) { return values_[i * grid_.points() + k]; }

private:
    TimeGrid grid_;
    std::size_t n_paths_;
    std::vector<double> values_;
};

/// Simulates n_paths trajectories. Normal draws are consumed trajectory-major
/// (every step of path 0, then path 1, ...) from `normals`, so the result is
/// independent of `threads`; threads == 0 uses the hardware concurrency.
PathEnsemble simulate_ensemble(const SdeModel& model, Scheme scheme, double delta, double horizon,
                               std::size_t n_paths, NormalSource& normals, unsigned threads = 1);

/// Same, driven by a caller-supplied matrix of normals (n_paths x steps,
/// path-major).
PathEnsemble simulate_ensemble_with(const SdeModel& model, Scheme scheme, const TimeGrid& grid,
                                    std::size_t n_paths, std::span<const double> normals, unsigned threads = 1);

/// BC_{k+1} = BC_k exp(delta r_k) along each rate path.
PathEnsemble capitalization_bond(const PathEnsemble& rates, double bc0);

struct ConvergenceReport {
    std::vector<double> deltas;
    std::vector<double> mean_abs_errors;
    /// Least-squares slope of ln(error) on ln(delta).
    double order = 0.0;
    /// exp(intercept): error ~ constant * delta^order.
    double constant = 0.0;
    /// Set when some error is zero (to machine precision) and no slope can be fitted.
    bool degenerate = false;
    /// Number of times the error increased as delta decreased.
    std::size_t inversions = 0;
};

/// Strong-error experiment: for each path, Brownian increments are drawn on
/// the finest grid; the reference is the exact step iterated on that grid and
/// every coarser scheme path uses the summed increments of the same path.
/// deltas must be strictly decreasing (at least three), each dividing the
/// horizon and an integer multiple of the finest one.
ConvergenceReport measure_strong_order(const SdeModel& model, Scheme scheme, std::span<const double> deltas,
                                       std::size_t n_paths, double horizon, NormalSource& normals);

/// Least-squares fit of ln y = ln K + gamma ln x. Returns {gamma, K}.
std::pair<double, double> fit_power_law(std::span<const double> x, std::span<const double> y);

} // namespace diffsim
