#include "doctest.h"

#include "diffsim/calibration.hpp"

#include <cmath>
#include <numeric>
#include <vector>

using namespace diffsim;

namespace {

// Affine zero rate of a deterministic mean-reverting short rate:
// R(t) = b - (b - r0)(1 - e^{-at}) / (a t).
double affine_rate_sigma0(double a, double b, double r0, double t) {
    return b - (b - r0) * (1.0 - std::exp(-a * t)) / (a * t);
}

std::vector<double> maturities_1_to_20() {
    std::vector<double> m(20);
    std::iota(m.begin(), m.end(), 1.0);
    return m;
}

std::vector<double> vasicek_series(const VasicekParams& p, double delta, std::size_t n, std::uint64_t seed) {
    NormalSource normals(std::make_unique<Lcg>(seed));
    return simulate_vasicek_series(p, delta, n, normals);
}

} // namespace

TEST_CASE("ar1 fit on a noiseless recurrence") {
    const double alpha = 0.0196735, beta = 0.6065307;
    std::vector<double> r{0.01};
    for (int k = 0; k < 30; ++k) r.push_back(alpha + beta * r.back());
    const auto f = fit_ar1(r);
    CHECK(f.alpha == doctest::Approx(alpha).epsilon(1e-12));
    CHECK(f.beta == doctest::Approx(beta).epsilon(1e-12));
    CHECK(f.sigma1 < 1e-12);
    CHECK(f.pairs == 30);
    CHECK_THROWS(fit_ar1(std::vector<double>{0.1, 0.2}));
    CHECK_THROWS(fit_ar1(std::vector<double>(10, 0.03)));
}

TEST_CASE("ar1 fit on an exact vasicek series") {
    const VasicekParams p{0.5, 0.05, 0.04, 0.1};
    const double delta = 1.0 / 12.0;
    const auto r = vasicek_series(p, delta, 50000, 3);
    const auto f = fit_ar1(r);
    CHECK(std::abs(f.beta - std::exp(-p.a * delta)) < 3.0 * f.beta_std_error);
}

TEST_CASE("ar1 to vasicek examples") {
    Ar1Fit f;
    f.beta = std::exp(-0.5);
    f.alpha = 0.05 * (1.0 - f.beta);
    f.sigma1 = 1.0;
    const auto e = ar1_to_vasicek(f, 1.0);
    CHECK(e.a == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(e.b == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(e.sigma * e.sigma == doctest::Approx(2.0 * -0.5 / (std::exp(-1.0) - 1.0)).epsilon(1e-14));
    CHECK(e.sigma * e.sigma == doctest::Approx(1.58198).epsilon(1e-5));
    CHECK(e.method == EstimationMethod::mle_exact);
    f.beta = 1.0;
    CHECK_THROWS_AS(ar1_to_vasicek(f, 1.0), std::domain_error);
    f.beta = -0.2;
    CHECK_THROWS_AS(ar1_to_vasicek(f, 1.0), std::domain_error);
}

TEST_CASE("ar1 mapping round trip") {
    for (double a : {0.05, 0.5, 2.0})
        for (double b : {-0.01, 0.05})
            for (double s : {0.0, 0.02, 0.3})
                for (double d : {1.0 / 252.0, 1.0 / 12.0, 1.0}) {
                    const VasicekParams p{a, b, 0.03, s};
                    const auto e = ar1_to_vasicek(vasicek_ar1_coefficients(p, d), d);
                    CHECK(std::abs(e.a - a) < 1e-12 * std::max(1.0, a));
                    CHECK(std::abs(e.b - b) < 1e-12);
                    CHECK(std::abs(e.sigma - s) < 1e-12);
                }
}

TEST_CASE("zero-coupon price examples") {
    const VasicekParams flat{0.4, 0.05, 0.05, 0.0};
    for (double t : {0.5, 1.0, 10.0}) CHECK(vasicek_zc_price(flat, t) == doctest::Approx(std::exp(-0.05 * t)).epsilon(1e-14));
    const VasicekParams p{0.2293, 0.0572, 0.0207, 0.03};
    CHECK(std::abs(vasicek_zc_price(p, 1e-8) - 1.0) < 1e-7);
    CHECK_THROWS_AS(vasicek_zc_price(p, 0.0), std::domain_error);
    const VasicekParams tab{0.2293, 0.0572, 0.0207, 0.0};
    const double oracle = std::exp(-10.0 * affine_rate_sigma0(tab.a, tab.b, tab.r0, 10.0));
    CHECK(vasicek_zc_price(tab, 10.0) == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(vasicek_zc_rate(tab, 10.0) == doctest::Approx(affine_rate_sigma0(tab.a, tab.b, tab.r0, 10.0)).epsilon(1e-13));
}

TEST_CASE("zero-coupon price decreases with maturity") {
    Lcg g(8);
    for (int rep = 0; rep < 200; ++rep) {
        const double a = 0.05 + 2.0 * g.next(), s = 0.1 * g.next();
        const double floor = s * s / (2.0 * a) + s * s / (4.0 * a);
        const VasicekParams p{a, floor + 0.001 + 0.1 * g.next(), floor + 0.001 + 0.1 * g.next(), s};
        double prev = 1.0;
        for (double t = 0.25; t <= 30.0; t += 0.25) {
            const double price = vasicek_zc_price(p, t);
            CHECK(price < prev);
            prev = price;
        }
    }
}

TEST_CASE("curve price-rate duality") {
    std::vector<CurvePoint> pts;
    for (int i = 1; i <= 30; ++i) pts.push_back({0.5 * i, 0.01 + 0.001 * i});
    const auto c = ZeroCouponCurve::from_rates(pts);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& pt = c.points()[i];
        CHECK(std::abs(std::exp(-pt.maturity * pt.rate) - c.price(i)) <= 1e-14);
        CHECK(std::abs(-std::log(c.price(i)) / pt.maturity - pt.rate) <= 1e-12);
    }
    const auto m = c.maturities();
    const auto pr = c.prices();
    const auto back = ZeroCouponCurve::from_prices(m, pr);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(back.rates()[i] - c.rates()[i]) < 1e-12);
    CHECK_THROWS(ZeroCouponCurve::from_rates({}));
    CHECK_THROWS(ZeroCouponCurve::from_rates({{1.0, 0.01}, {1.0, 0.02}}));
    CHECK_THROWS(ZeroCouponCurve::from_rates({{0.0, 0.01}}));
}

TEST_CASE("adhoc fit recovers a synthetic curve") {
    const VasicekParams truth{0.3, 0.06, 0.02, 0.05};
    const auto m = maturities_1_to_20();
    const auto curve = ZeroCouponCurve::from_model(truth, m);
    for (auto obj : {CurveObjective::prices, CurveObjective::rates}) {
        AdhocOptions o;
        o.objective = obj;
        o.r0 = truth.r0;
        const auto e = fit_adhoc(curve, o);
        CHECK(std::abs(e.a - truth.a) < 1e-4);
        CHECK(std::abs(e.b - truth.b) < 1e-4);
        CHECK(std::abs(e.sigma - truth.sigma) < 1e-4);
        CHECK(e.objective_value <= adhoc_objective(curve, obj, truth) + 1e-12);
        CHECK(e.method == (obj == CurveObjective::prices ? EstimationMethod::adhoc_prices : EstimationMethod::adhoc_rates));

        o.fixed_sigma = 0.05;
        const auto f = fit_adhoc(curve, o);
        CHECK(std::abs(f.a - truth.a) < 1e-5);
        CHECK(std::abs(f.b - truth.b) < 1e-5);
        CHECK(f.sigma == 0.05);
        REQUIRE(f.fixed_sigma.has_value());
    }
}

TEST_CASE("adhoc r0 defaults to the short end") {
    const auto curve = ZeroCouponCurve::from_rates({{0.25, 0.0207}, {1.0, 0.025}, {5.0, 0.035}, {10.0, 0.04}});
    const auto e = fit_adhoc(curve, {});
    CHECK(e.r0 == 0.0207);
    CHECK(e.a > 0.0);
    CHECK(e.sigma >= 0.0);
}

TEST_CASE("price and rate objectives trade off on a perturbed curve") {
    const VasicekParams truth{0.3, 0.06, 0.02, 0.05};
    const auto m = maturities_1_to_20();
    std::vector<CurvePoint> pts;
    for (double t : m) pts.push_back({t, vasicek_zc_rate(truth, t)});
    pts.back().rate += 0.001;
    const auto curve = ZeroCouponCurve::from_rates(pts);
    AdhocOptions o;
    o.r0 = truth.r0;
    o.objective = CurveObjective::prices;
    const auto ep = fit_adhoc(curve, o);
    o.objective = CurveObjective::rates;
    const auto er = fit_adhoc(curve, o);
    CHECK((ep.a != er.a || ep.b != er.b || ep.sigma != er.sigma));
    CHECK(curve_rmse(curve, CurveObjective::prices, ep.params()) < curve_rmse(curve, CurveObjective::prices, er.params()));
    CHECK(curve_rmse(curve, CurveObjective::rates, er.params()) < curve_rmse(curve, CurveObjective::rates, ep.params()));
}

TEST_CASE("adhoc reports exhaustion with the best point") {
    const auto curve = ZeroCouponCurve::from_model({0.3, 0.06, 0.02, 0.05}, maturities_1_to_20());
    AdhocOptions o;
    o.optimizer.max_evaluations = 5;
    try {
        fit_adhoc(curve, o);
        FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
        CHECK(std::isfinite(e.best().objective_value));
    }
}

TEST_CASE("auxiliary estimates") {
    const VasicekParams p{0.5, 0.05, 0.04, 0.1};
    const auto r = vasicek_series(p, 1.0, 2000, 4);
    const auto aux = auxiliary_estimate(r, 1.0, RateModel::vasicek, AuxScheme::euler);
    const auto f = fit_ar1(r);
    CHECK(aux[0] == doctest::Approx((1.0 - f.beta) / 1.0).epsilon(1e-14));
    CHECK(aux[1] == doctest::Approx(f.alpha / (1.0 - f.beta)).epsilon(1e-14));
    CHECK(aux[2] == doctest::Approx(f.sigma1).epsilon(1e-14));
    const auto mil = auxiliary_estimate(r, 1.0, RateModel::vasicek, AuxScheme::milstein);
    CHECK(mil == aux);

    NormalSource normals(std::make_unique<Lcg>(6));
    const auto c = simulate_cir_series({0.5, 0.05, 0.04, 0.1}, 1.0 / 12.0, 20000, 10, normals);
    for (double x : c) CHECK(std::isfinite(x));
    const auto ce = auxiliary_estimate(c, 1.0 / 12.0, RateModel::cir, AuxScheme::euler);
    const auto cm = auxiliary_estimate(c, 1.0 / 12.0, RateModel::cir, AuxScheme::milstein);
    CHECK(ce[0] == doctest::Approx(0.5).epsilon(0.3));
    CHECK(ce[1] == doctest::Approx(0.05).epsilon(0.2));
    CHECK(ce[2] == doctest::Approx(0.1).epsilon(0.05));
    CHECK(cm[2] == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("indirect objective identification") {
    const VasicekParams p{0.5, 0.05, 0.04, 0.1};
    const auto obs = vasicek_series(p, 1.0, 1000, 21);
    IndirectOptions o;
    o.seed = 5;
    const IndirectObjective q(obs, o);
    CHECK(q(p.a, p.b, p.sigma) < q(2.0 * p.a, p.b, p.sigma));
    CHECK(q(p.a, p.b, p.sigma) == q(p.a, p.b, p.sigma));
    CHECK(q(p.a, p.b, p.sigma) < 0.1 * p.a * p.a);
}

TEST_CASE("indirect inference input validation") {
    const auto short_obs = vasicek_series({0.5, 0.05, 0.04, 0.1}, 1.0, 50, 1);
    CHECK_THROWS_AS(fit_indirect(short_obs), std::invalid_argument);
    const auto obs = vasicek_series({0.5, 0.05, 0.04, 0.1}, 1.0, 200, 1);
    IndirectOptions o;
    o.sim_multiplier = 0;
    CHECK_THROWS_AS(fit_indirect(obs, o), std::invalid_argument);
}

TEST_CASE("indirect inference on monthly vasicek data") {
    // a=0.5, b=0.05, sigma=0.1, delta=1/12, n=5000, H=10, 10 seeded replications
    const VasicekParams truth{0.5, 0.05, 0.04, 0.1};
    const double delta = 1.0 / 12.0;
    int wins = 0;
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
        const auto obs = vasicek_series(truth, delta, 5000, 1000 + rep);
        IndirectOptions o;
        o.delta = delta;
        o.seed = 77 + rep;
        const auto r = fit_indirect(obs, o);
        CHECK(std::abs(r.estimate.a - truth.a) < 0.1 * truth.a);
        CHECK(std::abs(r.estimate.b - truth.b) < 0.1 * truth.b);
        if (std::abs(r.estimate.a - truth.a) < std::abs(r.naive.a - truth.a)) ++wins;
    }
    INFO("indirect closer than naive in " << wins << " of 10");
    CHECK(wins >= 8);
}

TEST_CASE("indirect averaging reduces variance") {
    const VasicekParams truth{0.5, 0.05, 0.04, 0.1};
    const auto obs = vasicek_series(truth, 1.0, 500, 31);
    auto spread = [&](std::size_t h) {
        std::vector<double> a;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            IndirectOptions o;
            o.sim_multiplier = h;
            o.seed = seed;
            a.push_back(fit_indirect(obs, o).estimate.a);
        }
        const double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
        double v = 0.0;
        for (double x : a) v += (x - mean) * (x - mean);
        return v / (a.size() - 1);
    };
    CHECK(spread(10) <= spread(1));
}

TEST_CASE("naive cir regression is biased and indirect inference reduces it") {
    const CirParams truth{0.5, 0.05, 0.05, 0.1};
    const int reps = 20;
    std::vector<double> naive, ii;
    for (int rep = 0; rep < reps; ++rep) {
        NormalSource normals(std::make_unique<Lcg>(500 + rep));
        const auto obs = simulate_cir_series(truth, 1.0, 1000, 10, normals);
        IndirectOptions o;
        o.model = RateModel::cir;
        o.sim_multiplier = 5;
        o.cir_substeps = 10;
        o.seed = 900 + rep;
        const auto r = fit_indirect(obs, o);
        naive.push_back(r.naive.a);
        ii.push_back(r.estimate.a);
    }
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    auto se = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / (v.size() - 1) / v.size());
    };
    const double naive_bias = mean(naive) - truth.a;
    INFO("naive mean a " << mean(naive) << " se " << se(naive) << ", indirect mean a " << mean(ii));
    CHECK(std::abs(naive_bias) > 2.0 * se(naive));
    CHECK(std::abs(mean(ii) - truth.a) < std::abs(naive_bias));
}

TEST_CASE("name parsing") {
    CHECK(parse_curve_objective("rates") == CurveObjective::rates);
    CHECK(parse_rate_model("cir") == RateModel::cir);
    CHECK(parse_aux_scheme("milstein") == AuxScheme::milstein);
    CHECK_THROWS(parse_curve_objective("yields"));
    CHECK(to_string(EstimationMethod::indirect) == "indirect");
}
