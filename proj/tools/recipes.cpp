#include "recipes.hpp"

#include "diffsim/pricing.hpp"
#include "diffsim/rng_tests.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace diffsim::recipes {

namespace {

// Vasicek setup of the mean-path comparison.
constexpr VasicekParams kVasicek{0.5, 0.05, 0.04, 0.10};
constexpr double kVasicekHorizon = 10.0;

// Equity setup of the generator benchmarks.
constexpr double kSpot = 100.0;
constexpr double kRate = 0.04;
constexpr double kVol = 0.20;
constexpr double kGbmHorizon = 20.0;

std::size_t or_default(std::size_t v, std::size_t d) { return v == 0 ? d : v; }
double or_default(double v, double d) { return v == 0.0 ? d : v; }

std::unique_ptr<UniformSource> mixed_torus(std::uint64_t prime, std::uint64_t capacity, std::uint64_t seed) {
    return std::make_unique<MixedTorus>(Torus(prime), std::make_unique<Lcg>(seed), capacity);
}

struct VasicekMeans {
    TimeGrid grid;
    std::vector<std::vector<double>> rate_means;  // exact, euler, milstein
    std::vector<std::vector<double>> bond_means;
};

VasicekMeans vasicek_means(const RecipeOptions& o) {
    const std::size_t n = or_default(o.n, std::size_t{10000});
    const double delta = or_default(o.delta, 1.0 / 12.0);
    const TimeGrid grid = TimeGrid::make(delta, kVasicekHorizon);
    const SdeModel model = vasicek_model(kVasicek);
    NormalSource normals(std::make_unique<Lcg>(o.seed));
    std::vector<double> eps(n * grid.steps);
    normals.fill(eps);
    VasicekMeans out{grid, {}, {}};
    for (Scheme s : {Scheme::exact, Scheme::euler, Scheme::milstein}) {
        const PathEnsemble rates = simulate_ensemble_with(model, s, grid, n, eps, o.threads);
        out.rate_means.push_back(mean_path(rates));
        out.bond_means.push_back(mean_path(capitalization_bond(rates, 1.0)));
    }
    return out;
}

CsvTable scheme_table(const TimeGrid& grid, const std::vector<std::vector<double>>& cols) {
    CsvTable t({"t", "exact", "euler", "milstein"});
    for (std::size_t k = 0; k < grid.points(); ++k) t.add_row({grid.time(k), cols[0][k], cols[1][k], cols[2][k]});
    return t;
}

CsvTable figure1(const RecipeOptions& o) {
    const auto m = vasicek_means(o);
    return scheme_table(m.grid, m.rate_means);
}

CsvTable figure2(const RecipeOptions& o) {
    const auto m = vasicek_means(o);
    return scheme_table(m.grid, m.bond_means);
}

CsvTable figure7(const RecipeOptions& o) {
    const std::size_t n = or_default(o.n, std::size_t{10000});
    const CallSpec spec{kSpot, kSpot, kRate, 0.0, 0.5, kVol};
    std::vector<std::size_t> marks;
    for (std::size_t m = 100; m <= n; m += 100) marks.push_back(m);

    std::vector<std::unique_ptr<UniformSource>> sources;
    sources.push_back(std::make_unique<Lcg>(o.seed));
    sources.push_back(std::make_unique<Lcg>(o.seed % LcgParams::spreadsheet_compat().modulus + 1,
                                            LcgParams::spreadsheet_compat()));
    sources.push_back(std::make_unique<Torus>(2));
    sources.push_back(mixed_torus(2, n, o.seed));
    std::vector<PricingErrorReport> reports;
    for (auto& s : sources) {
        NormalSource normals(std::move(s));
        reports.push_back(mc_call_price(spec, n, normals, marks).report);
    }
    CsvTable t({"n", "rho_lcg", "rho_lcg_compat", "rho_torus", "rho_mixed"});
    for (std::size_t i = 0; i < reports[0].n_sims.size(); ++i)
        t.add_row({static_cast<double>(reports[0].n_sims[i]), reports[0].relative_errors[i],
                   reports[1].relative_errors[i], reports[2].relative_errors[i], reports[3].relative_errors[i]});
    return t;
}

CsvTable gbm_mean_table(std::unique_ptr<UniformSource> uniforms, std::size_t n, unsigned threads) {
    const GbmParams p{kSpot, kRate, kVol};
    NormalSource normals(std::move(uniforms));
    const PathEnsemble paths = simulate_ensemble(gbm_model(p), Scheme::exact, 1.0, kGbmHorizon, n, normals, threads);
    const auto mean = mean_path(paths);
    CsvTable t({"t", "theoretical", "simulated_mean"});
    for (std::size_t k = 0; k < mean.size(); ++k) {
        const double time = paths.grid().time(k);
        t.add_row({time, kSpot * std::exp(kRate * time), mean[k]});
    }
    return t;
}

CsvTable figure8(const RecipeOptions& o) {
    return gbm_mean_table(std::make_unique<Torus>(2), or_default(o.n, std::size_t{10000}), o.threads);
}

CsvTable figure12(const RecipeOptions& o) {
    const std::size_t n = or_default(o.n, std::size_t{10000});
    const auto steps = static_cast<std::uint64_t>(kGbmHorizon);
    return gbm_mean_table(mixed_torus(2, n * steps, o.seed), n, o.threads);
}

CsvTable correlogram_table(UniformSource& src, std::size_t n) {
    std::vector<double> u(n);
    src.fill(u);
    const Correlogram c = correlogram(u, 50);
    CsvTable t({"lag", "rho"});
    for (const auto& l : c.lags) t.add_row({static_cast<double>(l.lag), l.rho});
    return t;
}

CsvTable figure9(const RecipeOptions& o) {
    Torus torus(5);
    return correlogram_table(torus, or_default(o.n, std::size_t{10000}));
}

CsvTable figure10(const RecipeOptions& o) {
    const std::size_t n = or_default(o.n, std::size_t{10000});
    MixedTorus src(Torus(5), std::make_unique<Torus>(19), n);
    return correlogram_table(src, n);
}

CsvTable figure11(const RecipeOptions& o) {
    const std::size_t n = or_default(o.n, std::size_t{10000});
    auto src = mixed_torus(5, n, o.seed);
    return correlogram_table(*src, n);
}

std::vector<std::string> poker_header(const std::string& first) {
    std::vector<std::string> h{first};
    for (std::size_t k = kPokerHandCount; k-- > 0;) h.push_back(to_string(static_cast<PokerHand>(k)));
    h.push_back("chi2_p_value");
    return h;
}

std::vector<double> poker_row(const std::array<double, kPokerHandCount>& freq, double p_value) {
    std::vector<double> row;
    for (std::size_t k = kPokerHandCount; k-- > 0;) row.push_back(freq[k]);
    row.push_back(p_value);
    return row;
}

std::array<double, kPokerHandCount> frequencies(const PokerFrequencies& f) {
    std::array<double, kPokerHandCount> out{};
    for (std::size_t k = 0; k < kPokerHandCount; ++k) out[k] = f.frequency(static_cast<PokerHand>(k));
    return out;
}

CsvTable table2(const RecipeOptions& o) {
    const std::size_t n = or_default(o.n, std::size_t{4000});
    CsvTable t(poker_header("source"));
    t.add_labeled_row("theoretical", poker_row(poker_theoretical_probabilities(), 1.0));
    for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29}) {
        Torus torus(p);
        std::vector<double> u(n);
        torus.fill(u);
        const PokerResult r = poker_test(u);
        t.add_labeled_row("torus_p" + std::to_string(p), poker_row(frequencies(r.frequencies), r.report.p_value));
    }
    return t;
}

CsvTable table3(const RecipeOptions& o) {
    const std::size_t n = or_default(o.n, std::size_t{40000});
    auto src = mixed_torus(2, n, o.seed);
    std::vector<double> u(n);
    src->fill(u);
    const PokerResult r = poker_test(u);
    CsvTable t(poker_header("source"));
    t.add_labeled_row("theoretical", poker_row(poker_theoretical_probabilities(), 1.0));
    t.add_labeled_row("mixed_torus_p2", poker_row(frequencies(r.frequencies), r.report.p_value));
    return t;
}

struct Recipe {
    const char* name;
    CsvTable (*fn)(const RecipeOptions&);
};

constexpr Recipe kRecipes[] = {
    {"figure1", figure1},   {"figure2", figure2},   {"figure7", figure7}, {"figure8", figure8},
    {"figure9", figure9},   {"figure10", figure10}, {"figure11", figure11}, {"figure12", figure12},
    {"table2", table2},     {"table3", table3},
};

} // namespace

std::vector<std::string> names() {
    std::vector<std::string> out;
    for (const auto& r : kRecipes) out.emplace_back(r.name);
    return out;
}

CsvTable run(const std::string& name, const RecipeOptions& options) {
    for (const auto& r : kRecipes)
        if (name == r.name) return r.fn(options);
    throw std::invalid_argument("unknown recipe '" + name + "'");
}

} // namespace diffsim::recipes
