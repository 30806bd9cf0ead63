#pragma once

#include "diffsim/nelder_mead.hpp"
#include "diffsim/sde.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffsim {

/// OLS fit of r_{k+1} = alpha + beta r_k + sigma1 eps.
struct Ar1Fit {
    double alpha = 0.0;
    double beta = 0.0;
    /// Residual standard deviation, divisor n (maximum-likelihood convention).
    double sigma1 = 0.0;
    std::size_t pairs = 0;
    /// Usual OLS standard error of beta.
    double beta_std_error = 0.0;
};

/// Regresses the series on its one-step lag. Throws std::invalid_argument for
/// fewer than three points or a constant lagged series.
Ar1Fit fit_ar1(std::span<const double> rates);

/// AR(1) coefficients of the exact Vasicek transition over delta:
/// beta = e^{-a delta}, alpha = b (1 - beta), sigma1^2 = sigma^2 (1 - beta^2) / (2a).
Ar1Fit vasicek_ar1_coefficients(const VasicekParams& p, double delta);

enum class EstimationMethod { mle_exact, adhoc_prices, adhoc_rates, indirect, naive_auxiliary };

std::string to_string(EstimationMethod m);

struct VasicekEstimate {
    double a = 0.0;
    double b = 0.0;
    double sigma = 0.0;
    double r0 = 0.0;
    EstimationMethod method = EstimationMethod::mle_exact;
    std::optional<double> fixed_sigma;
    double objective_value = 0.0;
    std::size_t iterations = 0;

    VasicekParams params() const { return {a, b, r0, sigma}; }
};

/// Inverts the exact-discretization coefficients with observation step delta
/// (in years): a = -ln(beta) / delta, b = alpha / (1 - beta),
/// sigma^2 = sigma1^2 * 2 ln(beta) / ((beta^2 - 1) delta).
/// Throws std::domain_error unless 0 < beta < 1.
VasicekEstimate ar1_to_vasicek(const Ar1Fit& fit, double delta);

/// Zero-coupon price at time 0 for maturity t under the closed form
/// exp{-t [b - s/(2a) - ((b - s/(2a) - r0)(1 - e^{-at}) - s/(4a) (1 - e^{-at})^2) / (a t)]},
/// s = sigma^2. Throws std::domain_error for t <= 0.
double vasicek_zc_price(const VasicekParams& p, double t);

/// Implied zero rate -ln P(t) / t.
double vasicek_zc_rate(const VasicekParams& p, double t);

struct CurvePoint {
    double maturity;
    double rate;
};

/// Zero-coupon curve, held as continuously compounded zero rates; prices are
/// P(0,T) = exp(-T R(0,T)).
class ZeroCouponCurve {
public:
    ZeroCouponCurve() = default;

    /// Throws std::invalid_argument when empty, a maturity is not positive or
    /// maturities are not strictly increasing.
    static ZeroCouponCurve from_rates(std::vector<CurvePoint> points);
    static ZeroCouponCurve from_prices(std::span<const double> maturities, std::span<const double> prices);
    static ZeroCouponCurve from_model(const VasicekParams& p, std::span<const double> maturities);

    std::span<const CurvePoint> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double price(std::size_t i) const;
    std::vector<double> maturities() const;
    std::vector<double> rates() const;
    std::vector<double> prices() const;

private:
    std::vector<CurvePoint> points_;
};

enum class CurveObjective { prices, rates };

CurveObjective parse_curve_objective(const std::string& name);

/// Sum over curve points of (model - market)^2 in prices or in zero rates.
double adhoc_objective(const ZeroCouponCurve& curve, CurveObjective objective, const VasicekParams& p);

/// Root-mean-square curve error in prices or rates.
double curve_rmse(const ZeroCouponCurve& curve, CurveObjective metric, const VasicekParams& p);

/// Search box for the least-squares and indirect fits.
struct ParameterBounds {
    double a_lo = 1e-4, a_hi = 5.0;
    double b_lo = -0.05, b_hi = 0.25;
    double sigma_lo = 0.0, sigma_hi = 0.5;
};

struct AdhocOptions {
    CurveObjective objective = CurveObjective::prices;
    std::optional<double> fixed_a;
    std::optional<double> fixed_b;
    std::optional<double> fixed_sigma;
    /// Defaults to the zero rate at the shortest maturity.
    std::optional<double> r0;
    ParameterBounds bounds;
    NelderMeadOptions optimizer;
};

/// Thrown when the optimizer exhausts its budget; carries the best point found.
class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, VasicekEstimate best)
        : std::runtime_error(what), best_(best) {}

    const VasicekEstimate& best() const { return best_; }

private:
    VasicekEstimate best_;
};

/// Least-squares fit of the closed-form zero-coupon curve over the free
/// parameters (those not fixed in options). Simplex search from five starting
/// points, each followed by restarts at its own optimum until the objective
/// stops improving.
VasicekEstimate fit_adhoc(const ZeroCouponCurve& curve, const AdhocOptions& options = {});

enum class RateModel { vasicek, cir };
enum class AuxScheme { euler, milstein };

RateModel parse_rate_model(const std::string& name);
AuxScheme parse_aux_scheme(const std::string& name);

/// Auxiliary parameters (a, b, sigma) read off a discretized scheme fitted to
/// a series observed every delta years.
///
/// Vasicek (both schemes coincide since sigma_x = 0): OLS of r_{k+1} on r_k,
/// a = (1 - beta)/delta, b = alpha/(1 - beta), sigma = sigma1/sqrt(delta).
/// CIR: drift from the regression of dr/sqrt(r) on (1/sqrt(r), sqrt(r));
/// euler takes sigma from the weighted residuals, milstein matches the raw
/// residual second moment to sigma^2 r delta + sigma^4 delta^2 / 8.
/// Rates are floored at 1e-6 inside the CIR weights.
std::array<double, 3> auxiliary_estimate(std::span<const double> rates, double delta, RateModel model,
                                         AuxScheme scheme);

struct IndirectOptions {
    RateModel model = RateModel::vasicek;
    AuxScheme aux = AuxScheme::euler;
    /// Simulated series per parameter evaluation.
    std::size_t sim_multiplier = 10;
    std::uint64_t seed = 1;
    /// Observation step in years.
    double delta = 1.0;
    /// Milstein sub-steps per observation when simulating CIR.
    std::size_t cir_substeps = 20;
    ParameterBounds bounds;
    NelderMeadOptions optimizer;
};

/// Distance between the auxiliary estimate on the observations and the mean
/// auxiliary estimate over H series simulated at a candidate parameter. The
/// normal draws are fixed at construction (common random numbers), so the
/// distance is a deterministic function of the parameter.
class IndirectObjective {
public:
    IndirectObjective(std::span<const double> observations, const IndirectOptions& options);

    double operator()(double a, double b, double sigma) const;
    std::array<double, 3> simulated_auxiliary(double a, double b, double sigma) const;
    const std::array<double, 3>& observed_auxiliary() const { return observed_aux_; }

private:
    std::vector<double> simulate(double a, double b, double sigma, std::size_t series) const;

    IndirectOptions options_;
    std::size_t length_;
    double r0_;
    std::array<double, 3> observed_aux_;
    std::vector<double> normals_;
};

struct IndirectResult {
    VasicekEstimate estimate;
    /// The auxiliary estimate on the observations taken at face value.
    VasicekEstimate naive;
};

/// Indirect inference. Throws std::invalid_argument for fewer than 100
/// observations or H = 0, CalibrationError on optimizer exhaustion.
IndirectResult fit_indirect(std::span<const double> observations, const IndirectOptions& options = {});

/// Exact Vasicek series of `length` points starting at p.r0, one step per delta.
std::vector<double> simulate_vasicek_series(const VasicekParams& p, double delta, std::size_t length,
                                            NormalSource& normals);

/// CIR series observed every delta, each interval integrated with `substeps`
/// full-truncation Milstein steps.
std::vector<double> simulate_cir_series(const CirParams& p, double delta, std::size_t length,
                                        std::size_t substeps, NormalSource& normals);

} // namespace diffsim
