#include "doctest.h"

#include "diffsim/pricing.hpp"
#include "diffsim/sde.hpp"

#include <cmath>
#include <vector>

using namespace diffsim;

namespace {

const VasicekParams kVas{0.5, 0.05, 0.04, 0.1};
const CirParams kCir{0.5, 0.05, 0.04, 0.1};

NormalSource lcg_normals(std::uint64_t seed) { return NormalSource(std::make_unique<Lcg>(seed)); }

} // namespace

TEST_CASE("euler step examples") {
    const auto vas = vasicek_model(kVas);
    CHECK(euler_step(vas, 0.04, 0.0, 1.0, 0.0) == doctest::Approx(0.045).epsilon(1e-15));
    const auto cir = cir_model(kCir);
    CHECK(euler_step(cir, 0.04, 0.0, 1.0, 1.0) == doctest::Approx(0.065).epsilon(1e-15));
    for (double d : {1e-6, 1e-10, 1e-14}) CHECK(std::abs(euler_step(vas, 0.04, 0.0, d, 0.0) - 0.04) < 1e-5 * d * 1e6);
    CHECK_THROWS(euler_step(vas, 0.04, 0.0, 0.0, 0.0));
}

TEST_CASE("milstein step examples") {
    const auto cir = cir_model(kCir);
    CHECK(milstein_step(cir, 0.04, 0.0, 1.0, 1.0) == doctest::Approx(0.065).epsilon(1e-15));
    CHECK(milstein_step(cir, 0.04, 0.0, 1.0, 0.0) == doctest::Approx(0.0425).epsilon(1e-14));
}

TEST_CASE("milstein equals euler bit for bit when the diffusion is constant") {
    const auto vas = vasicek_model(kVas);
    const auto abm = arithmetic_bm_model(1.0, 0.3, 0.7);
    Lcg g(3);
    for (int i = 0; i < 2000; ++i) {
        const double x = g.next() * 0.2 - 0.05, d = g.next(), e = 6.0 * g.next() - 3.0;
        CHECK(milstein_step(vas, x, 0.0, d, e) == euler_step(vas, x, 0.0, d, e));
        CHECK(milstein_step(abm, x, 0.0, d, e) == euler_step(abm, x, 0.0, d, e));
    }
}

TEST_CASE("diffusion derivative matches finite differences") {
    const std::vector<SdeModel> models{vasicek_model(kVas), cir_model(kCir), gbm_model({100.0, 0.04, 0.2}),
                                       arithmetic_bm_model(0.0, 0.1, 0.3)};
    for (const auto& m : models) {
        for (double x : {0.01, 0.04, 0.3, 2.0, 90.0}) {
            const double h = 1e-6 * x;
            const double fd = (m.diffusion(x + h, 0.0) - m.diffusion(x - h, 0.0)) / (2.0 * h);
            const double an = m.diffusion_x(x, 0.0);
            CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
            CHECK(m.diffusion(x, 0.0) >= 0.0);
        }
    }
}

TEST_CASE("cir full truncation keeps steps defined below zero") {
    const auto cir = cir_model(kCir);
    const double x = -0.01;
    CHECK(cir.diffusion(x, 0.0) == 0.0);
    CHECK(cir.drift(x, 0.0) == doctest::Approx(0.5 * 0.05));
    CHECK(std::isfinite(milstein_step(cir, x, 0.0, 0.1, 2.0)));
    CHECK(CirParams{0.5, 0.05, 0.04, 0.1}.feller());
    CHECK_FALSE(CirParams{0.1, 0.01, 0.04, 0.3}.feller());
}

TEST_CASE("vasicek exact step examples") {
    const VasicekParams det{0.5, 0.05, 0.04, 0.0};
    CHECK(vasicek_exact_step(det, 0.04, 1.0, 0.7) == doctest::Approx(0.0439347).epsilon(1e-6));
    CHECK(vasicek_exact_step(det, 0.04, 1.0, 0.0) == doctest::Approx(0.05 - 0.01 * std::exp(-0.5)).epsilon(1e-14));
    CHECK(vasicek_exact_step(det, 0.05, 1.0, 0.0) == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("vasicek exact step conditional moments") {
    Lcg g(2024);
    NormalSource normals(std::make_unique<Lcg>(2024));
    const double r = 0.02, d = 0.5;
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = vasicek_exact_step(kVas, r, d, normals.next());
        s += x;
        s2 += x * x;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    const double m_th = r * std::exp(-kVas.a * d) + kVas.b * (1.0 - std::exp(-kVas.a * d));
    const double v_th = kVas.sigma * kVas.sigma * (1.0 - std::exp(-2.0 * kVas.a * d)) / (2.0 * kVas.a);
    CHECK(std::abs(mean - m_th) < 3.0 * std::sqrt(v_th / n));
    CHECK(std::abs(var - v_th) < 3.0 * v_th * std::sqrt(2.0 / n));
}

TEST_CASE("gbm exact step examples") {
    CHECK(gbm_exact_step({100.0, 0.0, 0.2}, 100.0, 1.0, 0.0) == doctest::Approx(100.0 * std::exp(-0.02)).epsilon(1e-15));
    CHECK(gbm_exact_step({100.0, 0.05, 0.0}, 100.0, 1.0, 1.3) == doctest::Approx(100.0 * std::exp(0.05)).epsilon(1e-15));
    const GbmParams p{1.0, 0.1, 0.8};
    for (double e : {-40.0, -8.0, 0.0, 8.0})
        for (double d : {1e-3, 1.0, 20.0}) CHECK(gbm_exact_step(p, 1e-3, d, e) > 0.0);
}

TEST_CASE("scheme names and exact availability") {
    for (auto s : {Scheme::exact, Scheme::euler, Scheme::milstein}) CHECK(parse_scheme(to_string(s)) == s);
    CHECK_THROWS(parse_scheme("runge-kutta"));
    CHECK_FALSE(cir_model(kCir).has_exact_step());
    CHECK_THROWS_AS(scheme_step(cir_model(kCir), Scheme::exact, 0.04, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS(VasicekParams{0.0, 0.05, 0.04, 0.1}.validate());
    CHECK_THROWS(VasicekParams{0.5, 0.05, 0.04, -0.1}.validate());
    CHECK_THROWS(CirParams{0.5, -0.05, 0.04, 0.1}.validate());
    CHECK_THROWS(GbmParams{0.0, 0.05, 0.1}.validate());
    CHECK_NOTHROW(kVas.validate());
}

TEST_CASE("time grid") {
    const auto g = TimeGrid::make(1.0 / 12.0, 10.0);
    CHECK(g.steps == 120);
    CHECK(g.points() == 121);
    for (std::size_t k = 0; k <= g.steps; ++k) CHECK(g.time(k) == static_cast<double>(k) * (1.0 / 12.0));
    CHECK_THROWS(TimeGrid::make(0.3, 1.0));
    CHECK_THROWS(TimeGrid::make(0.0, 1.0));
}

TEST_CASE("deterministic vasicek ensemble is the mean-reversion curve") {
    const VasicekParams det{0.5, 0.05, 0.04, 0.0};
    auto normals = lcg_normals(1);
    const auto paths = simulate_ensemble(vasicek_model(det), Scheme::exact, 0.25, 10.0, 1, normals);
    for (std::size_t k = 0; k < paths.grid().points(); ++k) {
        const double t = paths.grid().time(k);
        CHECK(paths.at(0, k) == doctest::Approx(0.04 * std::exp(-0.5 * t) + 0.05 * (1.0 - std::exp(-0.5 * t))).epsilon(1e-13));
    }
}

TEST_CASE("ensemble initial state and trajectory-major consumption") {
    auto normals = lcg_normals(7);
    const auto grid = TimeGrid::make(0.5, 2.0);
    const auto paths = simulate_ensemble(vasicek_model(kVas), Scheme::euler, 0.5, 2.0, 3, normals);
    auto replay = lcg_normals(7);
    const auto model = vasicek_model(kVas);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(paths.at(i, 0) == kVas.r0);
        double x = kVas.r0;
        for (std::size_t k = 0; k < grid.steps; ++k) {
            x = euler_step(model, x, grid.time(k), 0.5, replay.next());
            CHECK(paths.at(i, k + 1) == x);
        }
    }
    CHECK_THROWS(simulate_ensemble(model, Scheme::euler, 0.3, 1.0, 2, normals));
}

TEST_CASE("ensemble is independent of thread count") {
    auto n1 = lcg_normals(5), n4 = lcg_normals(5);
    const auto a = simulate_ensemble(gbm_model({100.0, 0.04, 0.2}), Scheme::milstein, 0.1, 2.0, 257, n1, 1);
    const auto b = simulate_ensemble(gbm_model({100.0, 0.04, 0.2}), Scheme::milstein, 0.1, 2.0, 257, n4, 4);
    for (std::size_t i = 0; i < 257; ++i)
        for (std::size_t k = 0; k < a.grid().points(); ++k) CHECK(a.at(i, k) == b.at(i, k));
}

TEST_CASE("mean terminal vasicek rate") {
    auto normals = lcg_normals(11);
    const std::size_t n = 10000;
    const auto paths = simulate_ensemble(vasicek_model(kVas), Scheme::exact, 1.0 / 12.0, 10.0, n, normals, 0);
    const auto mean = mean_path(paths);
    const double th = 0.05 - 0.01 * std::exp(-5.0);
    CHECK(th == doctest::Approx(0.049933).epsilon(1e-5));
    const double sd = 0.1 * std::sqrt((1.0 - std::exp(-10.0)) / 1.0);
    CHECK(std::abs(mean.back() - th) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("capitalization bond") {
    PathEnsemble flat(TimeGrid::make(1.0, 2.0), 2);
    for (std::size_t k = 0; k < 3; ++k) {
        flat.at(0, k) = 0.04;
        flat.at(1, k) = 0.0;
    }
    const auto bc = capitalization_bond(flat, 1.0);
    CHECK(bc.at(0, 0) == 1.0);
    CHECK(bc.at(0, 2) == doctest::Approx(std::exp(0.08)).epsilon(1e-15));
    CHECK(bc.at(1, 2) == 1.0);
}

TEST_CASE("power-law fit") {
    const std::vector<double> x{0.1, 0.01, 0.001};
    const std::vector<double> y{2.0 * std::pow(0.1, 0.75), 2.0 * std::pow(0.01, 0.75), 2.0 * std::pow(0.001, 0.75)};
    const auto [g, k] = fit_power_law(x, y);
    CHECK(g == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(k == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("strong order on gbm") {
    const std::vector<double> deltas{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    const auto model = gbm_model({1.0, 0.05, 0.2});
    auto ne = lcg_normals(1);
    const auto euler = measure_strong_order(model, Scheme::euler, deltas, 20000, 1.0, ne);
    auto nm = lcg_normals(1);
    const auto mil = measure_strong_order(model, Scheme::milstein, deltas, 20000, 1.0, nm);
    CHECK(euler.order >= 0.4);
    CHECK(euler.order <= 0.7);
    CHECK(mil.order >= 0.85);
    CHECK(mil.order <= 1.15);
    for (const auto* r : {&euler, &mil}) {
        CHECK(r->inversions <= 1);
        for (double e : r->mean_abs_errors) CHECK(e >= 0.0);
        CHECK_FALSE(r->degenerate);
    }
}

TEST_CASE("strong order degenerate and invalid inputs") {
    const std::vector<double> deltas{0.25, 0.125, 0.0625};
    auto n = lcg_normals(2);
    const auto r = measure_strong_order(arithmetic_bm_model(0.0, 0.3, 0.0), Scheme::euler, deltas, 100, 1.0, n);
    CHECK(r.degenerate);
    for (double e : r.mean_abs_errors) CHECK(e < 1e-13);
    CHECK(std::isnan(r.order));

    const auto vas = vasicek_model({0.5, 0.05, 0.04, 0.0});
    auto n2 = lcg_normals(2);
    CHECK(measure_strong_order(vas, Scheme::euler, deltas, 10, 1.0, n2).mean_abs_errors.size() == 3);

    const std::vector<double> two{0.25, 0.125};
    CHECK_THROWS(measure_strong_order(vas, Scheme::euler, two, 10, 1.0, n2));
    const std::vector<double> unsorted{0.125, 0.25, 0.0625};
    CHECK_THROWS(measure_strong_order(vas, Scheme::euler, unsorted, 10, 1.0, n2));
    CHECK_THROWS(measure_strong_order(cir_model(kCir), Scheme::euler, deltas, 10, 1.0, n2));
}
