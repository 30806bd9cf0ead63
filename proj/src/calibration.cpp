#include "diffsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace diffsim {

Ar1Fit fit_ar1(std::span<const double> rates) {
    if (rates.size() < 3) throw std::invalid_argument("fit_ar1: need at least three observations");
    const std::size_t m = rates.size() - 1;
    const auto x = rates.first(m);
    const auto y = rates.subspan(1);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw std::invalid_argument("fit_ar1: constant series");
    const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        sxx += (x[k] - xm) * (x[k] - xm);
        sxy += (x[k] - xm) * (y[k] - ym);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_ar1: constant series");

    Ar1Fit fit;
    fit.pairs = m;
    fit.beta = sxy / sxx;
    fit.alpha = ym - fit.beta * xm;
    double rss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double e = y[k] - fit.alpha - fit.beta * x[k];
        rss += e * e;
    }
    fit.sigma1 = std::sqrt(rss / static_cast<double>(m));
    if (m > 2) fit.beta_std_error = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
    return fit;
}

Ar1Fit vasicek_ar1_coefficients(const VasicekParams& p, double delta) {
    p.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("vasicek_ar1_coefficients: delta must be positive");
    Ar1Fit fit;
    fit.beta = std::exp(-p.a * delta);
    fit.alpha = p.b * (1.0 - fit.beta);
    fit.sigma1 = p.sigma * std::sqrt((1.0 - fit.beta * fit.beta) / (2.0 * p.a));
    return fit;
}

std::string to_string(EstimationMethod m) {
    switch (m) {
    case EstimationMethod::mle_exact: return "mle_exact";
    case EstimationMethod::adhoc_prices: return "adhoc_prices";
    case EstimationMethod::adhoc_rates: return "adhoc_rates";
    case EstimationMethod::indirect: return "indirect";
    case EstimationMethod::naive_auxiliary: return "naive_auxiliary";
    }
    return "?";
}

VasicekEstimate ar1_to_vasicek(const Ar1Fit& fit, double delta) {
    if (!(fit.beta > 0.0 && fit.beta < 1.0))
        throw std::domain_error("ar1_to_vasicek: beta must lie in (0, 1)");
    if (!(delta > 0.0)) throw std::invalid_argument("ar1_to_vasicek: delta must be positive");
    const double log_beta = std::log(fit.beta);
    VasicekEstimate est;
    est.method = EstimationMethod::mle_exact;
    est.a = -log_beta / delta;
    est.b = fit.alpha / (1.0 - fit.beta);
    est.sigma = std::sqrt(fit.sigma1 * fit.sigma1 * 2.0 * log_beta / ((fit.beta * fit.beta - 1.0) * delta));
    return est;
}

double vasicek_zc_price(const VasicekParams& p, double t) {
    if (!(t > 0.0)) throw std::domain_error("vasicek_zc_price: maturity must be positive");
    p.validate();
    const double s2 = p.sigma * p.sigma;
    const double level = p.b - s2 / (2.0 * p.a);
    const double one_minus = -std::expm1(-p.a * t);
    const double bracket = level - ((level - p.r0) * one_minus - s2 / (4.0 * p.a) * one_minus * one_minus) / (p.a * t);
    return std::exp(-t * bracket);
}

double vasicek_zc_rate(const VasicekParams& p, double t) {
    return -std::log(vasicek_zc_price(p, t)) / t;
}

ZeroCouponCurve ZeroCouponCurve::from_rates(std::vector<CurvePoint> points) {
    if (points.empty()) throw std::invalid_argument("zero-coupon curve: no points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].maturity > 0.0)) throw std::invalid_argument("zero-coupon curve: maturities must be positive");
        if (!std::isfinite(points[i].rate)) throw std::invalid_argument("zero-coupon curve: non-finite rate");
        if (i > 0 && !(points[i].maturity > points[i - 1].maturity))
            throw std::invalid_argument("zero-coupon curve: maturities must be strictly increasing");
    }
    ZeroCouponCurve c;
    c.points_ = std::move(points);
    return c;
}

ZeroCouponCurve ZeroCouponCurve::from_prices(std::span<const double> maturities, std::span<const double> prices) {
    if (maturities.size() != prices.size()) throw std::invalid_argument("zero-coupon curve: size mismatch");
    std::vector<CurvePoint> pts;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0)) throw std::invalid_argument("zero-coupon curve: prices must be positive");
        pts.push_back({maturities[i], -std::log(prices[i]) / maturities[i]});
    }
    return from_rates(std::move(pts));
}

ZeroCouponCurve ZeroCouponCurve::from_model(const VasicekParams& p, std::span<const double> maturities) {
    std::vector<CurvePoint> pts;
    for (double t : maturities) pts.push_back({t, vasicek_zc_rate(p, t)});
    return from_rates(std::move(pts));
}

double ZeroCouponCurve::price(std::size_t i) const {
    return std::exp(-points_[i].maturity * points_[i].rate);
}

std::vector<double> ZeroCouponCurve::maturities() const {
    std::vector<double> out;
    for (const auto& p : points_) out.push_back(p.maturity);
    return out;
}

std::vector<double> ZeroCouponCurve::rates() const {
    std::vector<double> out;
    for (const auto& p : points_) out.push_back(p.rate);
    return out;
}

std::vector<double> ZeroCouponCurve::prices() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < points_.size(); ++i) out.push_back(price(i));
    return out;
}

CurveObjective parse_curve_objective(const std::string& name) {
    if (name == "prices") return CurveObjective::prices;
    if (name == "rates") return CurveObjective::rates;
    throw std::invalid_argument("unknown objective '" + name + "'");
}

double adhoc_objective(const ZeroCouponCurve& curve, CurveObjective objective, const VasicekParams& p) {
    double sum = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double t = curve.points()[i].maturity;
        const double diff = objective == CurveObjective::prices ? vasicek_zc_price(p, t) - curve.price(i)
                                                                : vasicek_zc_rate(p, t) - curve.points()[i].rate;
        sum += diff * diff;
    }
    return sum;
}

double curve_rmse(const ZeroCouponCurve& curve, CurveObjective metric, const VasicekParams& p) {
    return std::sqrt(adhoc_objective(curve, metric, p) / static_cast<double>(curve.size()));
}

namespace {

// x = lo + (hi - lo) sin^2(z): unconstrained z, x confined to [lo, hi].
double to_box(double z, double lo, double hi) {
    const double s = std::sin(z);
    return lo + (hi - lo) * s * s;
}

double from_box(double x, double lo, double hi) {
    const double f = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    return std::asin(std::sqrt(f));
}

struct FreeParameter {
    int slot;  // 0 = a, 1 = b, 2 = sigma
    double lo;
    double hi;
};

struct BoxedSearch {
    std::vector<FreeParameter> free;
    std::array<double, 3> fixed{};

    std::array<double, 3> unpack(const std::vector<double>& z) const {
        std::array<double, 3> v = fixed;
        for (std::size_t i = 0; i < free.size(); ++i) v[free[i].slot] = to_box(z[i], free[i].lo, free[i].hi);
        return v;
    }

    std::vector<double> pack(const std::array<double, 3>& v) const {
        std::vector<double> z;
        for (const auto& f : free) z.push_back(from_box(v[f.slot], f.lo, f.hi));
        return z;
    }
};

struct SearchOutcome {
    std::array<double, 3> params{};
    double value = HUGE_VAL;
    std::size_t evaluations = 0;
    bool converged = false;
};

// Simplex search from each start, restarting at the optimum until a restart
// no longer improves the objective.
SearchOutcome multistart_search(const BoxedSearch& box, const std::function<double(const std::array<double, 3>&)>& f,
                                const std::vector<std::array<double, 3>>& starts, const NelderMeadOptions& options,
                                std::size_t max_restarts = 8) {
    auto objective = [&](const std::vector<double>& z) { return f(box.unpack(z)); };
    SearchOutcome best;
    for (const auto& start : starts) {
        NelderMeadResult run = nelder_mead(objective, box.pack(start), options);
        best.evaluations += run.evaluations;
        for (std::size_t r = 0; r < max_restarts; ++r) {
            NelderMeadOptions polish = options;
            polish.initial_step = options.initial_step * 0.1;
            NelderMeadResult again = nelder_mead(objective, run.x, polish);
            best.evaluations += again.evaluations;
            const bool improved = again.value < run.value - options.f_tol_rel * std::fabs(run.value) - options.f_tol_abs;
            if (again.value <= run.value) run = again;
            if (!improved) break;
        }
        if (run.value < best.value) {
            best.value = run.value;
            best.params = box.unpack(run.x);
            best.converged = run.converged;
        }
    }
    return best;
}

BoxedSearch make_box(const ParameterBounds& bounds, std::optional<double> fa, std::optional<double> fb,
                     std::optional<double> fs) {
    BoxedSearch box;
    const std::array<std::optional<double>, 3> fixed{fa, fb, fs};
    const std::array<std::pair<double, double>, 3> lims{std::pair{bounds.a_lo, bounds.a_hi},
                                                        std::pair{bounds.b_lo, bounds.b_hi},
                                                        std::pair{bounds.sigma_lo, bounds.sigma_hi}};
    for (int slot = 0; slot < 3; ++slot) {
        if (fixed[slot])
            box.fixed[slot] = *fixed[slot];
        else
            box.free.push_back({slot, lims[slot].first, lims[slot].second});
    }
    return box;
}

std::array<double, 3> clamp_to(const std::array<double, 3>& v, const ParameterBounds& b) {
    return {std::clamp(v[0], b.a_lo, b.a_hi), std::clamp(v[1], b.b_lo, b.b_hi),
            std::clamp(v[2], b.sigma_lo, b.sigma_hi)};
}

} // namespace

VasicekEstimate fit_adhoc(const ZeroCouponCurve& curve, const AdhocOptions& options) {
    const BoxedSearch box = make_box(options.bounds, options.fixed_a, options.fixed_b, options.fixed_sigma);
    if (curve.size() < box.free.size())
        throw std::invalid_argument("fit_adhoc: fewer curve points than free parameters");
    const double r0 = options.r0.value_or(curve.points().front().rate);

    VasicekEstimate est;
    est.method = options.objective == CurveObjective::prices ? EstimationMethod::adhoc_prices
                                                             : EstimationMethod::adhoc_rates;
    est.fixed_sigma = options.fixed_sigma;
    est.r0 = r0;
    if (box.free.empty()) {
        est.a = box.fixed[0];
        est.b = box.fixed[1];
        est.sigma = box.fixed[2];
        est.objective_value = adhoc_objective(curve, options.objective, est.params());
        return est;
    }

    auto f = [&](const std::array<double, 3>& v) {
        return adhoc_objective(curve, options.objective, VasicekParams{v[0], v[1], r0, v[2]});
    };
    // Starting grid (a, b, sigma); fixed coordinates are overridden by unpack.
    const std::vector<std::array<double, 3>> starts{
        {0.1, 0.03, 0.01}, {0.3, 0.05, 0.05}, {0.8, 0.08, 0.10}, {1.5, 0.10, 0.20}, {3.0, 0.15, 0.30}};
    std::vector<std::array<double, 3>> boxed_starts;
    for (const auto& s : starts) boxed_starts.push_back(clamp_to(s, options.bounds));

    const SearchOutcome out = multistart_search(box, f, boxed_starts, options.optimizer);
    est.a = out.params[0];
    est.b = out.params[1];
    est.sigma = out.params[2];
    est.objective_value = out.value;
    est.iterations = out.evaluations;
    if (!out.converged) throw CalibrationError("fit_adhoc: simplex search did not converge within budget", est);
    return est;
}

RateModel parse_rate_model(const std::string& name) {
    if (name == "vasicek") return RateModel::vasicek;
    if (name == "cir") return RateModel::cir;
    throw std::invalid_argument("unknown rate model '" + name + "'");
}

AuxScheme parse_aux_scheme(const std::string& name) {
    if (name == "euler") return AuxScheme::euler;
    if (name == "milstein") return AuxScheme::milstein;
    throw std::invalid_argument("unknown auxiliary scheme '" + name + "'");
}

namespace {

std::array<double, 3> cir_auxiliary(std::span<const double> r, double delta, AuxScheme scheme) {
    constexpr double kFloor = 1e-6;
    const std::size_t m = r.size() - 1;
    // y = c1 * u + c2 * v with u = 1/sqrt(r), v = sqrt(r), y = dr / sqrt(r).
    double suu = 0.0, suv = 0.0, svv = 0.0, suy = 0.0, svy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double s = std::sqrt(std::max(r[k], kFloor));
        const double u = 1.0 / s;
        const double v = s;
        const double y = (r[k + 1] - r[k]) / s;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suy += u * y;
        svy += v * y;
    }
    const double det = suu * svv - suv * suv;
    if (!(std::fabs(det) > 0.0)) throw std::invalid_argument("auxiliary_estimate: singular CIR regression");
    const double c1 = (svv * suy - suv * svy) / det;
    const double c2 = (suu * svy - suv * suy) / det;
    const double a = -c2 / delta;
    const double b = c2 != 0.0 ? -c1 / c2 : 0.0;

    double sum_w2 = 0.0, sum_e2 = 0.0, sum_r = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double rk = std::max(r[k], kFloor);
        const double s = std::sqrt(rk);
        const double e = (r[k + 1] - r[k]) - (c1 + c2 * rk);
        sum_w2 += (e / s) * (e / s);
        sum_e2 += e * e;
        sum_r += rk;
    }
    const double mm = static_cast<double>(m);
    double sigma = 0.0;
    if (scheme == AuxScheme::euler) {
        sigma = std::sqrt(sum_w2 / mm / delta);
    } else {
        // (m delta^2 / 8) s^2 + (delta sum r) s - sum e^2 = 0, s = sigma^2.
        const double qa = mm * delta * delta / 8.0;
        const double qb = delta * sum_r;
        const double s2 = (-qb + std::sqrt(qb * qb + 4.0 * qa * sum_e2)) / (2.0 * qa);
        sigma = std::sqrt(std::max(s2, 0.0));
    }
    return {a, b, sigma};
}

} // namespace

std::array<double, 3> auxiliary_estimate(std::span<const double> rates, double delta, RateModel model,
                                         AuxScheme scheme) {
    if (!(delta > 0.0)) throw std::invalid_argument("auxiliary_estimate: delta must be positive");
    if (model == RateModel::cir) {
        if (rates.size() < 3) throw std::invalid_argument("auxiliary_estimate: need at least three observations");
        return cir_auxiliary(rates, delta, scheme);
    }
    const Ar1Fit fit = fit_ar1(rates);
    const double one_minus = 1.0 - fit.beta;
    return {one_minus / delta, one_minus != 0.0 ? fit.alpha / one_minus : 0.0, fit.sigma1 / std::sqrt(delta)};
}

std::vector<double> simulate_vasicek_series(const VasicekParams& p, double delta, std::size_t length,
                                            NormalSource& normals) {
    p.validate();
    std::vector<double> r(length);
    if (length == 0) return r;
    r[0] = p.r0;
    for (std::size_t k = 1; k < length; ++k) r[k] = vasicek_exact_step(p, r[k - 1], delta, normals.next());
    return r;
}

std::vector<double> simulate_cir_series(const CirParams& p, double delta, std::size_t length,
                                        std::size_t substeps, NormalSource& normals) {
    if (substeps == 0) throw std::invalid_argument("simulate_cir_series: substeps must be positive");
    const SdeModel model = cir_model(p);
    const double h = delta / static_cast<double>(substeps);
    std::vector<double> r(length);
    if (length == 0) return r;
    r[0] = p.r0;
    double x = p.r0;
    for (std::size_t k = 1; k < length; ++k) {
        for (std::size_t q = 0; q < substeps; ++q) x = milstein_step(model, x, 0.0, h, normals.next());
        r[k] = x;
    }
    return r;
}

namespace {

std::uint64_t lcg_seed_from(std::uint64_t seed) {
    constexpr std::uint64_t kModulus = 2147483647u;
    return seed % (kModulus - 1) + 1;
}

} // namespace

IndirectObjective::IndirectObjective(std::span<const double> observations, const IndirectOptions& options)
    : options_(options), length_(observations.size()) {
    if (observations.size() < 100) throw std::invalid_argument("fit_indirect: need at least 100 observations");
    if (options.sim_multiplier == 0) throw std::invalid_argument("fit_indirect: H must be at least 1");
    if (!(options.delta > 0.0)) throw std::invalid_argument("fit_indirect: delta must be positive");
    r0_ = observations.front();
    observed_aux_ = auxiliary_estimate(observations, options.delta, options.model, options.aux);
    const std::size_t per_step = options.model == RateModel::cir ? options.cir_substeps : 1;
    normals_.resize(options.sim_multiplier * (length_ - 1) * per_step);
    NormalSource src(std::make_unique<Lcg>(lcg_seed_from(options.seed)));
    src.fill(normals_);
}

std::vector<double> IndirectObjective::simulate(double a, double b, double sigma, std::size_t series) const {
    const std::size_t per_step = options_.model == RateModel::cir ? options_.cir_substeps : 1;
    const std::size_t block = (length_ - 1) * per_step;
    const double* eps = normals_.data() + series * block;
    std::vector<double> r(length_);
    r[0] = r0_;
    if (options_.model == RateModel::vasicek) {
        const VasicekParams p{a, b, r0_, sigma};
        for (std::size_t k = 1; k < length_; ++k) r[k] = vasicek_exact_step(p, r[k - 1], options_.delta, eps[k - 1]);
        return r;
    }
    const SdeModel model = cir_model(CirParams{a, std::max(b, 0.0), std::max(r0_, 0.0), sigma});
    const double h = options_.delta / static_cast<double>(per_step);
    double x = r[0];
    for (std::size_t k = 1; k < length_; ++k) {
        for (std::size_t q = 0; q < per_step; ++q) x = milstein_step(model, x, 0.0, h, *eps++);
        r[k] = x;
    }
    return r;
}

std::array<double, 3> IndirectObjective::simulated_auxiliary(double a, double b, double sigma) const {
    std::array<double, 3> mean{};
    for (std::size_t s = 0; s < options_.sim_multiplier; ++s) {
        const auto series = simulate(a, b, sigma, s);
        const auto aux = auxiliary_estimate(series, options_.delta, options_.model, options_.aux);
        for (std::size_t j = 0; j < 3; ++j) mean[j] += aux[j];
    }
    for (double& v : mean) v /= static_cast<double>(options_.sim_multiplier);
    return mean;
}

double IndirectObjective::operator()(double a, double b, double sigma) const {
    const auto sim = simulated_auxiliary(a, b, sigma);
    double d = 0.0;
    for (std::size_t j = 0; j < 3; ++j) d += (sim[j] - observed_aux_[j]) * (sim[j] - observed_aux_[j]);
    return std::isfinite(d) ? d : HUGE_VAL;
}

IndirectResult fit_indirect(std::span<const double> observations, const IndirectOptions& options) {
    const IndirectObjective objective(observations, options);
    ParameterBounds bounds = options.bounds;
    if (options.model == RateModel::cir) bounds.b_lo = std::max(bounds.b_lo, 0.0);

    IndirectResult result;
    const auto& aux = objective.observed_auxiliary();
    result.naive.method = EstimationMethod::naive_auxiliary;
    result.naive.a = aux[0];
    result.naive.b = aux[1];
    result.naive.sigma = aux[2];
    result.naive.r0 = observations.front();

    const BoxedSearch box = make_box(bounds, std::nullopt, std::nullopt, std::nullopt);
    auto f = [&](const std::array<double, 3>& v) { return objective(v[0], v[1], v[2]); };
    NelderMeadOptions nm = options.optimizer;
    nm.initial_step = 0.05;
    const SearchOutcome out = multistart_search(box, f, {clamp_to(aux, bounds)}, nm, 3);

    result.estimate.method = EstimationMethod::indirect;
    result.estimate.a = out.params[0];
    result.estimate.b = out.params[1];
    result.estimate.sigma = out.params[2];
    result.estimate.r0 = observations.front();
    result.estimate.objective_value = out.value;
    result.estimate.iterations = out.evaluations;
    if (!out.converged)
        throw CalibrationError("fit_indirect: simplex search did not converge within budget", result.estimate);
    return result;
}

} // namespace diffsim
