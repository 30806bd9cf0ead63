#include "diffsim/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace diffsim {

double SdeModel::param(const std::string& key) const {
    for (const auto& [k, v] : params)
        if (k == key) return v;
    throw std::out_of_range("SdeModel: no parameter '" + key + "'");
}

void VasicekParams::validate() const {
    if (!(a > 0.0)) throw std::invalid_argument("Vasicek: a must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("Vasicek: sigma must be non-negative");
}

void CirParams::validate() const {
    if (!(a > 0.0)) throw std::invalid_argument("CIR: a must be positive");
    if (!(b >= 0.0)) throw std::invalid_argument("CIR: b must be non-negative");
    if (!(r0 >= 0.0)) throw std::invalid_argument("CIR: r0 must be non-negative");
    if (!(sigma >= 0.0)) throw std::invalid_argument("CIR: sigma must be non-negative");
}

void GbmParams::validate() const {
    if (!(s0 > 0.0)) throw std::invalid_argument("GBM: s0 must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("GBM: sigma must be non-negative");
}

double vasicek_exact_step(const VasicekParams& p, double r, double delta, double eps) {
    const double decay = std::exp(-p.a * delta);
    const double sd = p.sigma * std::sqrt(-std::expm1(-2.0 * p.a * delta) / (2.0 * p.a));
    return r * decay + p.b * (1.0 - decay) + sd * eps;
}

double gbm_exact_step(const GbmParams& p, double s, double delta, double eps) {
    return s * std::exp((p.mu - 0.5 * p.sigma * p.sigma) * delta + p.sigma * std::sqrt(delta) * eps);
}

SdeModel vasicek_model(const VasicekParams& p) {
    p.validate();
    SdeModel m;
    m.name = "vasicek";
    m.drift = [a = p.a, b = p.b](double x, double) { return a * (b - x); };
    m.diffusion = [s = p.sigma](double, double) { return s; };
    m.diffusion_x = [](double, double) { return 0.0; };
    m.params = {{"a", p.a}, {"b", p.b}, {"r0", p.r0}, {"sigma", p.sigma}};
    m.x0 = p.r0;
    m.exact_step = [p](double x, double delta, double eps) { return vasicek_exact_step(p, x, delta, eps); };
    return m;
}

SdeModel cir_model(const CirParams& p) {
    p.validate();
    SdeModel m;
    m.name = "cir";
    m.drift = [a = p.a, b = p.b](double x, double) { return a * (b - std::max(x, 0.0)); };
    m.diffusion = [s = p.sigma](double x, double) { return s * std::sqrt(std::max(x, 0.0)); };
    m.diffusion_x = [s = p.sigma](double x, double) { return x > 0.0 ? s / (2.0 * std::sqrt(x)) : 0.0; };
    m.params = {{"a", p.a}, {"b", p.b}, {"r0", p.r0}, {"sigma", p.sigma}, {"feller", p.feller() ? 1.0 : 0.0}};
    m.x0 = p.r0;
    return m;
}

SdeModel gbm_model(const GbmParams& p) {
    p.validate();
    SdeModel m;
    m.name = "gbm";
    m.drift = [mu = p.mu](double x, double) { return mu * x; };
    m.diffusion = [s = p.sigma](double x, double) { return s * x; };
    m.diffusion_x = [s = p.sigma](double, double) { return s; };
    m.params = {{"s0", p.s0}, {"mu", p.mu}, {"sigma", p.sigma}};
    m.x0 = p.s0;
    m.exact_step = [p](double x, double delta, double eps) { return gbm_exact_step(p, x, delta, eps); };
    return m;
}

SdeModel arithmetic_bm_model(double x0, double mu, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("arithmetic BM: sigma must be non-negative");
    SdeModel m;
    m.name = "abm";
    m.drift = [mu](double, double) { return mu; };
    m.diffusion = [sigma](double, double) { return sigma; };
    m.diffusion_x = [](double, double) { return 0.0; };
    m.params = {{"mu", mu}, {"sigma", sigma}};
    m.x0 = x0;
    m.exact_step = [mu, sigma](double x, double delta, double eps) {
        return x + mu * delta + sigma * std::sqrt(delta) * eps;
    };
    return m;
}

double euler_step(const SdeModel& model, double x, double t, double delta, double eps) {
    if (!(delta > 0.0)) throw std::invalid_argument("euler_step: delta must be positive");
    return x + model.drift(x, t) * delta + model.diffusion(x, t) * std::sqrt(delta) * eps;
}

double milstein_step(const SdeModel& model, double x, double t, double delta, double eps) {
    const double euler = euler_step(model, x, t, delta, eps);
    const double sx = model.diffusion_x(x, t);
    if (sx == 0.0) return euler;
    return euler + 0.5 * sx * model.diffusion(x, t) * delta * (eps * eps - 1.0);
}

Scheme parse_scheme(const std::string& name) {
    if (name == "exact") return Scheme::exact;
    if (name == "euler") return Scheme::euler;
    if (name == "milstein") return Scheme::milstein;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme) {
    switch (scheme) {
    case Scheme::exact: return "exact";
    case Scheme::euler: return "euler";
    case Scheme::milstein: return "milstein";
    }
    return "?";
}

double scheme_step(const SdeModel& model, Scheme scheme, double x, double t, double delta, double eps) {
    switch (scheme) {
    case Scheme::exact:
        if (!model.has_exact_step())
            throw std::invalid_argument("model '" + model.name + "' has no exact discretization");
        return model.exact_step(x, delta, eps);
    case Scheme::euler: return euler_step(model, x, t, delta, eps);
    case Scheme::milstein: return milstein_step(model, x, t, delta, eps);
    }
    throw std::invalid_argument("scheme_step: unknown scheme");
}

TimeGrid TimeGrid::make(double delta, double horizon) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("time grid: delta must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("time grid: horizon must be positive");
    const double ratio = horizon / delta;
    const double steps = std::round(ratio);
    if (steps < 1.0 || std::fabs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("time grid: horizon / delta is not an integer");
    return TimeGrid{delta, static_cast<std::size_t>(steps)};
}

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t n_paths)
    : grid_(grid), n_paths_(n_paths), values_(n_paths * grid.points(), 0.0) {}

std::span<const double> PathEnsemble::path(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * grid_.points(), grid_.points());
}

std::span<double> PathEnsemble::path(std::size_t i) {
    return std::span<double>(values_).subspan(i * grid_.points(), grid_.points());
}

namespace {

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&fn, begin, end] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
}

} // namespace

PathEnsemble simulate_ensemble_with(const SdeModel& model, Scheme scheme, const TimeGrid& grid,
                                    std::size_t n_paths, std::span<const double> normals, unsigned threads) {
    if (n_paths == 0) throw std::invalid_argument("simulate_ensemble: n_paths must be positive");
    if (normals.size() != n_paths * grid.steps)
        throw std::invalid_argument("simulate_ensemble: need n_paths * steps normal draws");
    if (scheme == Scheme::exact && !model.has_exact_step())
        throw std::invalid_argument("model '" + model.name + "' has no exact discretization");
    PathEnsemble out(grid, n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        auto path = out.path(i);
        const auto eps = normals.subspan(i * grid.steps, grid.steps);
        path[0] = model.x0;
        for (std::size_t k = 0; k < grid.steps; ++k)
            path[k + 1] = scheme_step(model, scheme, path[k], grid.time(k), grid.delta, eps[k]);
    });
    return out;
}

PathEnsemble simulate_ensemble(const SdeModel& model, Scheme scheme, double delta, double horizon,
                               std::size_t n_paths, NormalSource& normals, unsigned threads) {
    const TimeGrid grid = TimeGrid::make(delta, horizon);
    if (scheme == Scheme::exact && !model.has_exact_step())
        throw std::invalid_argument("model '" + model.name + "' has no exact discretization");
    std::vector<double> eps(n_paths * grid.steps);
    normals.fill(eps);
    return simulate_ensemble_with(model, scheme, grid, n_paths, eps, threads);
}

PathEnsemble capitalization_bond(const PathEnsemble& rates, double bc0) {
    const TimeGrid& grid = rates.grid();
    PathEnsemble out(grid, rates.n_paths());
    for (std::size_t i = 0; i < rates.n_paths(); ++i) {
        out.at(i, 0) = bc0;
        for (std::size_t k = 0; k < grid.steps; ++k)
            out.at(i, k + 1) = out.at(i, k) * std::exp(grid.delta * rates.at(i, k));
    }
    return out;
}

std::pair<double, double> fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_power_law: need matching points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    return {slope, std::exp(intercept)};
}

ConvergenceReport measure_strong_order(const SdeModel& model, Scheme scheme, std::span<const double> deltas,
                                       std::size_t n_paths, double horizon, NormalSource& normals) {
    if (deltas.size() < 3) throw std::invalid_argument("measure_strong_order: need at least three deltas");
    if (!model.has_exact_step())
        throw std::invalid_argument("measure_strong_order: model '" + model.name + "' has no exact step");
    if (n_paths == 0) throw std::invalid_argument("measure_strong_order: n_paths must be positive");
    for (std::size_t j = 1; j < deltas.size(); ++j)
        if (!(deltas[j] < deltas[j - 1]))
            throw std::invalid_argument("measure_strong_order: deltas must be strictly decreasing");

    const TimeGrid fine = TimeGrid::make(deltas.back(), horizon);
    std::vector<TimeGrid> grids;
    std::vector<std::size_t> ratios;
    for (double d : deltas) {
        grids.push_back(TimeGrid::make(d, horizon));
        const double ratio = d / fine.delta;
        const double rounded = std::round(ratio);
        if (std::fabs(ratio - rounded) > 1e-9 * ratio)
            throw std::invalid_argument("measure_strong_order: each delta must be a multiple of the finest");
        ratios.push_back(static_cast<std::size_t>(rounded));
    }

    std::vector<double> abs_err_sum(deltas.size(), 0.0);
    std::vector<double> eps(fine.steps);
    for (std::size_t p = 0; p < n_paths; ++p) {
        normals.fill(eps);
        double reference = model.x0;
        for (std::size_t k = 0; k < fine.steps; ++k)
            reference = model.exact_step(reference, fine.delta, eps[k]);

        for (std::size_t j = 0; j < deltas.size(); ++j) {
            const std::size_t m = ratios[j];
            const double scale = 1.0 / std::sqrt(static_cast<double>(m));
            double x = model.x0;
            for (std::size_t k = 0; k < grids[j].steps; ++k) {
                double sum = 0.0;
                for (std::size_t q = 0; q < m; ++q) sum += eps[k * m + q];
                x = scheme_step(model, scheme, x, grids[j].time(k), grids[j].delta, sum * scale);
            }
            abs_err_sum[j] += std::fabs(x - reference);
        }
    }

    ConvergenceReport report;
    report.deltas.assign(deltas.begin(), deltas.end());
    for (double s : abs_err_sum) report.mean_abs_errors.push_back(s / static_cast<double>(n_paths));
    for (std::size_t j = 1; j < report.mean_abs_errors.size(); ++j)
        if (report.mean_abs_errors[j] > report.mean_abs_errors[j - 1]) ++report.inversions;

    const double floor_err = 1e-13 * std::max(1.0, std::fabs(model.x0));
    report.degenerate = std::any_of(report.mean_abs_errors.begin(), report.mean_abs_errors.end(),
                                    [floor_err](double e) { return e <= floor_err; });
    if (report.degenerate) {
        report.order = std::numeric_limits<double>::quiet_NaN();
        report.constant = std::numeric_limits<double>::quiet_NaN();
    } else {
        std::tie(report.order, report.constant) = fit_power_law(report.deltas, report.mean_abs_errors);
    }
    return report;
}

} // namespace diffsim
