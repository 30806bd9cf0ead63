#include "cli.hpp"

#include "recipes.hpp"

#include "diffsim/calibration.hpp"
#include "diffsim/dist_transforms.hpp"
#include "diffsim/io.hpp"
#include "diffsim/pricing.hpp"
#include "diffsim/rng_tests.hpp"
#include "diffsim/sde.hpp"
#include "diffsim/special_functions.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace diffsim::cli {

namespace {

using nlohmann::json;

struct SourceArgs {
    std::string source = "lcg";
    std::uint64_t prime = 2;
    std::uint64_t seed = 1;
    double alpha = MixedTorus::kDefaultAlpha;
    std::uint64_t mixer_prime = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--source", source, "Uniform source: lcg, lcg-compat, torus, mixed")
            ->capture_default_str()
            ->check(CLI::IsMember({"lcg", "lcg-compat", "torus", "mixed"}));
        cmd->add_option("--prime", prime, "Torus prime")->capture_default_str();
        cmd->add_option("--seed", seed, "LCG seed (also the mixer seed)")->capture_default_str();
        cmd->add_option("--alpha", alpha, "Mixed-torus index spread factor")->capture_default_str();
        cmd->add_option("--mixer-prime", mixer_prime, "Mix the torus by a second torus of this prime (0 = LCG)")
            ->capture_default_str();
    }

    std::unique_ptr<UniformSource> make(std::uint64_t capacity) const {
        SourceSpec spec;
        spec.kind = parse_source_kind(source);
        spec.prime = prime;
        spec.seed = seed;
        spec.alpha = alpha;
        spec.mixer_prime = mixer_prime;
        spec.capacity = capacity;
        return make_source(spec);
    }
};

json report_to_json(const TestReport& r) {
    json details = json::array();
    for (const auto& d : r.details) details.push_back({{"label", d.label}, {"observed", d.observed}, {"expected", d.expected}});
    json j{{"test", r.name},
           {"statistic", r.statistic},
           {"p_value", r.p_value},
           {"level", r.level},
           {"verdict", r.passed ? "pass" : "fail"},
           {"details", details}};
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

json estimate_to_json(const VasicekEstimate& e) {
    json j{{"method", to_string(e.method)}, {"a", e.a},
           {"b", e.b},                      {"sigma", e.sigma},
           {"r0", e.r0},                    {"objective_value", e.objective_value},
           {"iterations", e.iterations}};
    if (e.fixed_sigma) j["fixed_sigma"] = *e.fixed_sigma;
    return j;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_text_file(path, text);
}

json config_echo(const std::vector<std::string>& args) {
    return json{{"args", args}};
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"diffsim: uniform generators, statistical tests, diffusion schemes, pricing and calibration"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads for path simulation (0 = hardware concurrency)");

    std::function<void()> action;

    // rng -----------------------------------------------------------------
    auto* rng = app.add_subcommand("rng", "Uniform generators and their quality tests");
    rng->require_subcommand(1);

    SourceArgs gen_src;
    std::uint64_t gen_count = 1000;
    std::string gen_out;
    auto* gen = rng->add_subcommand("gen", "Emit uniforms, one per line");
    gen_src.attach(gen);
    gen->add_option("--count", gen_count, "Number of values")->capture_default_str();
    gen->add_option("--out", gen_out, "Output CSV (default stdout)");
    gen->callback([&] {
        action = [&] {
            auto src = gen_src.make(gen_count);
            std::string text;
            for (std::uint64_t i = 0; i < gen_count; ++i) {
                text += format_double(src->next());
                text += '\n';
            }
            emit(gen_out, text, out);
        };
    });

    SourceArgs tr_src;
    std::string tr_dist = "normal";
    std::string tr_method = "moro";
    double tr_lambda = 1.0;
    std::uint64_t tr_count = 1000;
    std::string tr_out;
    auto* transform = rng->add_subcommand("transform", "Emit normal or Poisson variates");
    tr_src.attach(transform);
    transform->add_option("--dist", tr_dist, "normal or poisson")
        ->capture_default_str()
        ->check(CLI::IsMember({"normal", "poisson"}));
    transform->add_option("--method", tr_method, "Normal method: moro or box-muller")->capture_default_str();
    transform->add_option("--lambda", tr_lambda, "Poisson intensity")->capture_default_str();
    transform->add_option("--count", tr_count, "Number of variates")->capture_default_str();
    transform->add_option("--out", tr_out, "Output CSV (default stdout)");
    transform->callback([&] {
        action = [&] {
            std::string text = tr_dist + "\n";
            if (tr_dist == "normal") {
                const std::uint64_t draws = parse_normal_method(tr_method) == NormalMethod::box_muller ? 2 * tr_count : tr_count;
                NormalSource normals(tr_src.make(draws), parse_normal_method(tr_method));
                for (std::uint64_t i = 0; i < tr_count; ++i) text += format_double(normals.next()) + "\n";
            } else {
                auto src = tr_src.make(std::max<std::uint64_t>(1, tr_count * static_cast<std::uint64_t>(tr_lambda + 2.0)));
                for (std::uint64_t i = 0; i < tr_count; ++i) text += std::to_string(poisson_sample(tr_lambda, *src)) + "\n";
            }
            emit(tr_out, text, out);
        };
    });

    SourceArgs test_src;
    std::uint64_t test_count = 10000;
    std::string battery = "chi2,ks,ad,poker,correlogram";
    std::size_t bins = 20;
    std::size_t max_lag = 50;
    double level = 0.05;
    std::string test_out;
    auto* test = rng->add_subcommand("test", "Run the statistical battery on a uniform source");
    test_src.attach(test);
    test->add_option("--count", test_count, "Sample size")->capture_default_str();
    test->add_option("--battery", battery, "Comma-separated subset of chi2,ks,ad,poker,correlogram")
        ->capture_default_str();
    test->add_option("--bins", bins, "Chi-square bins")->capture_default_str();
    test->add_option("--max-lag", max_lag, "Correlogram lags")->capture_default_str();
    test->add_option("--level", level, "Significance level")->capture_default_str();
    test->add_option("--out", test_out, "Output JSON (default stdout)");
    test->callback([&] {
        action = [&] {
            auto src = test_src.make(test_count);
            std::vector<double> u(test_count);
            src->fill(u);
            json reports = json::array();
            for (const auto& name : split_list(battery)) {
                if (name == "chi2")
                    reports.push_back(report_to_json(chi_square_uniform(u, bins, level)));
                else if (name == "ks")
                    reports.push_back(report_to_json(ks_test(u, uniform_cdf, level)));
                else if (name == "ad")
                    reports.push_back(report_to_json(anderson_darling_test(u, uniform_cdf, level)));
                else if (name == "poker")
                    reports.push_back(report_to_json(poker_test(u, level).report));
                else if (name == "correlogram")
                    reports.push_back(report_to_json(correlogram_test(u, max_lag, level)));
                else
                    throw std::invalid_argument("unknown test '" + name + "'");
            }
            json doc{{"config_echo", config_echo(args)},
                     {"source", test_src.source},
                     {"count", test_count},
                     {"reports", reports}};
            emit(test_out, doc.dump(2) + "\n", out);
        };
    });

    // sde -----------------------------------------------------------------
    auto* sde = app.add_subcommand("sde", "Diffusion simulation and strong-order measurement");
    sde->require_subcommand(1);

    struct ModelArgs {
        std::string model = "vasicek";
        double a = 0.5, b = 0.05, r0 = 0.04, sigma = 0.1, s0 = 100.0, mu = 0.05;

        void attach(CLI::App* cmd) {
            cmd->add_option("--model", model, "vasicek, cir or gbm")
                ->capture_default_str()
                ->check(CLI::IsMember({"vasicek", "cir", "gbm"}));
            cmd->add_option("--a", a, "Mean-reversion speed")->capture_default_str();
            cmd->add_option("--b", b, "Long-run level")->capture_default_str();
            cmd->add_option("--r0", r0, "Initial rate")->capture_default_str();
            cmd->add_option("--sigma", sigma, "Volatility")->capture_default_str();
            cmd->add_option("--s0", s0, "Initial price (gbm)")->capture_default_str();
            cmd->add_option("--mu", mu, "Drift (gbm)")->capture_default_str();
        }

        SdeModel build() const {
            if (model == "vasicek") return vasicek_model({a, b, r0, sigma});
            if (model == "cir") return cir_model({a, b, r0, sigma});
            return gbm_model({s0, mu, sigma});
        }
    };

    ModelArgs sim_model;
    SourceArgs sim_src;
    std::string sim_scheme = "exact";
    double sim_delta = 1.0 / 12.0;
    double sim_horizon = 10.0;
    std::size_t sim_paths = 100;
    std::string sim_out;
    auto* simulate = sde->add_subcommand("simulate", "Simulate a path ensemble");
    sim_model.attach(simulate);
    sim_src.attach(simulate);
    simulate->add_option("--scheme", sim_scheme, "exact, euler or milstein")
        ->capture_default_str()
        ->check(CLI::IsMember({"exact", "euler", "milstein"}));
    simulate->add_option("--delta", sim_delta, "Time step in years")->capture_default_str();
    simulate->add_option("-T,--horizon", sim_horizon, "Horizon in years")->capture_default_str();
    simulate->add_option("-n,--paths", sim_paths, "Number of paths")->capture_default_str();
    simulate->add_option("--out", sim_out, "Output CSV (default stdout)");
    simulate->callback([&] {
        action = [&] {
            const TimeGrid grid = TimeGrid::make(sim_delta, sim_horizon);
            NormalSource normals(sim_src.make(sim_paths * grid.steps));
            const PathEnsemble paths = simulate_ensemble(sim_model.build(), parse_scheme(sim_scheme), sim_delta,
                                                         sim_horizon, sim_paths, normals, threads);
            std::vector<std::string> header{"t"};
            for (std::size_t i = 0; i < sim_paths; ++i) header.push_back("path_" + std::to_string(i));
            CsvTable table(header);
            std::vector<double> row(sim_paths + 1);
            for (std::size_t k = 0; k < grid.points(); ++k) {
                row[0] = grid.time(k);
                for (std::size_t i = 0; i < sim_paths; ++i) row[i + 1] = paths.at(i, k);
                table.add_row(row);
            }
            emit(sim_out, table.str(), out);
        };
    });

    ModelArgs conv_model;
    conv_model.model = "gbm";
    conv_model.sigma = 0.2;
    SourceArgs conv_src;
    std::string conv_scheme = "euler";
    std::string conv_deltas = "0.125,0.0625,0.03125,0.015625,0.0078125";
    double conv_horizon = 1.0;
    std::size_t conv_paths = 20000;
    std::string conv_out;
    std::string conv_csv;
    auto* convergence = sde->add_subcommand("convergence", "Measure the strong order of a scheme");
    conv_model.attach(convergence);
    conv_src.attach(convergence);
    convergence->add_option("--scheme", conv_scheme, "euler or milstein")
        ->capture_default_str()
        ->check(CLI::IsMember({"exact", "euler", "milstein"}));
    convergence->add_option("--deltas", conv_deltas, "Comma-separated, strictly decreasing steps")->capture_default_str();
    convergence->add_option("-T,--horizon", conv_horizon, "Horizon in years")->capture_default_str();
    convergence->add_option("-n,--paths", conv_paths, "Number of coupled paths")->capture_default_str();
    convergence->add_option("--out", conv_out, "Output JSON report (default stdout)");
    convergence->add_option("--csv", conv_csv, "Optional log-log CSV (delta, mean_abs_error)");
    convergence->callback([&] {
        action = [&] {
            std::vector<double> deltas;
            for (const auto& s : split_list(conv_deltas)) deltas.push_back(std::stod(s));
            const double finest = deltas.empty() ? 1.0 : deltas.back();
            const auto fine_steps = static_cast<std::uint64_t>(std::llround(conv_horizon / finest));
            NormalSource normals(conv_src.make(conv_paths * fine_steps));
            const ConvergenceReport r =
                measure_strong_order(conv_model.build(), parse_scheme(conv_scheme), deltas, conv_paths, conv_horizon, normals);
            json doc{{"config_echo", config_echo(args)},
                     {"deltas", r.deltas},
                     {"mean_abs_terminal_errors", r.mean_abs_errors},
                     {"fitted_order", r.degenerate ? json(nullptr) : json(r.order)},
                     {"constant", r.degenerate ? json(nullptr) : json(r.constant)},
                     {"degenerate", r.degenerate},
                     {"inversions", r.inversions}};
            if (!conv_csv.empty()) {
                CsvTable t({"delta", "mean_abs_error"});
                for (std::size_t j = 0; j < r.deltas.size(); ++j) t.add_row({r.deltas[j], r.mean_abs_errors[j]});
                t.write(conv_csv);
            }
            emit(conv_out, doc.dump(2) + "\n", out);
        };
    });

    // price ---------------------------------------------------------------
    auto* price = app.add_subcommand("price", "Option pricing");
    price->require_subcommand(1);
    double c_s = 100.0, c_k = 100.0, c_r = 0.04, c_sigma = 0.2, c_tau = 0.5;
    std::size_t c_n = 10000;
    std::size_t c_every = 100;
    SourceArgs c_src;
    c_src.source = "torus";
    std::string c_out;
    auto* call = price->add_subcommand("call", "Monte-Carlo European call against the closed form");
    call->add_option("--s", c_s, "Spot")->capture_default_str();
    call->add_option("--k", c_k, "Strike")->capture_default_str();
    call->add_option("--r", c_r, "Risk-free rate")->capture_default_str();
    call->add_option("--sigma", c_sigma, "Volatility")->capture_default_str();
    call->add_option("--tau", c_tau, "Time to expiry in years")->capture_default_str();
    call->add_option("--n", c_n, "Number of simulations")->capture_default_str();
    call->add_option("--every", c_every, "Checkpoint spacing for the error table")->capture_default_str();
    c_src.attach(call);
    call->add_option("--out", c_out, "Output CSV: n, estimate, rho (default stdout)");
    call->callback([&] {
        action = [&] {
            const CallSpec spec{c_s, c_k, c_r, 0.0, c_tau, c_sigma};
            std::vector<std::size_t> marks;
            for (std::size_t m = std::max<std::size_t>(c_every, 1); m <= c_n; m += std::max<std::size_t>(c_every, 1))
                marks.push_back(m);
            NormalSource normals(c_src.make(c_n));
            const McCallResult r = mc_call_price(spec, c_n, normals, marks);
            CsvTable t({"n", "estimate", "rho"});
            for (std::size_t i = 0; i < r.report.n_sims.size(); ++i)
                t.add_row({static_cast<double>(r.report.n_sims[i]), r.report.estimates[i], r.report.relative_errors[i]});
            emit(c_out, t.str(), out);
        };
    });

    // calib ---------------------------------------------------------------
    auto* calib = app.add_subcommand("calib", "Vasicek / CIR parameter estimation");
    calib->require_subcommand(1);

    std::string ah_curve;
    std::string ah_objective = "prices";
    std::vector<std::string> ah_fix;
    double ah_r0 = std::nan("");
    std::string ah_out;
    auto* adhoc = calib->add_subcommand("adhoc", "Least squares on a zero-coupon curve");
    adhoc->add_option("--curve", ah_curve, "CSV with header maturity_years,zero_rate")->required();
    adhoc->add_option("--objective", ah_objective, "prices or rates")
        ->capture_default_str()
        ->check(CLI::IsMember({"prices", "rates"}));
    adhoc->add_option("--fix", ah_fix, "Fix a parameter, e.g. sigma=0.05 (repeatable)");
    adhoc->add_option("--r0", ah_r0, "Short rate (default: zero rate at the shortest maturity)");
    adhoc->add_option("--out", ah_out, "Output JSON (default stdout)");
    adhoc->callback([&] {
        action = [&] {
            const ZeroCouponCurve curve = read_curve_csv(ah_curve);
            AdhocOptions o;
            o.objective = parse_curve_objective(ah_objective);
            for (const auto& f : ah_fix) {
                const auto eq = f.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("--fix expects name=value, got '" + f + "'");
                const std::string key = f.substr(0, eq);
                const double value = std::stod(f.substr(eq + 1));
                if (key == "a")
                    o.fixed_a = value;
                else if (key == "b")
                    o.fixed_b = value;
                else if (key == "sigma")
                    o.fixed_sigma = value;
                else
                    throw std::invalid_argument("--fix: unknown parameter '" + key + "'");
            }
            if (!std::isnan(ah_r0)) o.r0 = ah_r0;
            json doc;
            try {
                doc = estimate_to_json(fit_adhoc(curve, o));
            } catch (const CalibrationError& e) {
                err << "warning: " << e.what() << "\n";
                throw;
            }
            doc["config_echo"] = config_echo(args);
            doc["price_rmse"] = curve_rmse(curve, CurveObjective::prices, VasicekParams{doc["a"], doc["b"], doc["r0"], doc["sigma"]});
            doc["rate_rmse"] = curve_rmse(curve, CurveObjective::rates, VasicekParams{doc["a"], doc["b"], doc["r0"], doc["sigma"]});
            emit(ah_out, doc.dump(2) + "\n", out);
        };
    });

    std::string ii_series;
    std::string ii_model = "vasicek";
    std::string ii_aux = "euler";
    std::size_t ii_h = 10;
    std::uint64_t ii_seed = 1;
    double ii_delta = 1.0;
    std::size_t ii_substeps = 20;
    std::string ii_out;
    auto* indirect = calib->add_subcommand("indirect", "Indirect inference on a short-rate series");
    indirect->add_option("--series", ii_series, "CSV of observed rates (one per line)")->required();
    indirect->add_option("--model", ii_model, "vasicek or cir")
        ->capture_default_str()
        ->check(CLI::IsMember({"vasicek", "cir"}));
    indirect->add_option("--aux", ii_aux, "Auxiliary scheme: euler or milstein")
        ->capture_default_str()
        ->check(CLI::IsMember({"euler", "milstein"}));
    indirect->add_option("--H", ii_h, "Simulated series per evaluation")->capture_default_str();
    indirect->add_option("--seed", ii_seed, "Seed of the common random numbers")->capture_default_str();
    indirect->add_option("--delta", ii_delta, "Observation step in years")->capture_default_str();
    indirect->add_option("--substeps", ii_substeps, "CIR simulation sub-steps per observation")->capture_default_str();
    indirect->add_option("--out", ii_out, "Output JSON (default stdout)");
    indirect->callback([&] {
        action = [&] {
            const auto series = read_series_csv(ii_series);
            IndirectOptions o;
            o.model = parse_rate_model(ii_model);
            o.aux = parse_aux_scheme(ii_aux);
            o.sim_multiplier = ii_h;
            o.seed = ii_seed;
            o.delta = ii_delta;
            o.cir_substeps = ii_substeps;
            const IndirectResult r = fit_indirect(series, o);
            json doc = estimate_to_json(r.estimate);
            doc["model"] = ii_model;
            doc["naive"] = estimate_to_json(r.naive);
            doc["config_echo"] = config_echo(args);
            emit(ii_out, doc.dump(2) + "\n", out);
        };
    });

    std::string mle_series;
    double mle_delta = 1.0;
    std::string mle_out;
    auto* mle = calib->add_subcommand("mle", "Exact-discretization (AR(1)) estimate of Vasicek parameters");
    mle->add_option("--series", mle_series, "CSV of observed rates (one per line)")->required();
    mle->add_option("--delta", mle_delta, "Observation step in years")->capture_default_str();
    mle->add_option("--out", mle_out, "Output JSON (default stdout)");
    mle->callback([&] {
        action = [&] {
            const auto series = read_series_csv(mle_series);
            const Ar1Fit fit = fit_ar1(series);
            VasicekEstimate e = ar1_to_vasicek(fit, mle_delta);
            e.r0 = series.front();
            json doc = estimate_to_json(e);
            doc["ar1"] = {{"alpha", fit.alpha}, {"beta", fit.beta}, {"sigma1", fit.sigma1}, {"beta_std_error", fit.beta_std_error}};
            doc["config_echo"] = config_echo(args);
            emit(mle_out, doc.dump(2) + "\n", out);
        };
    });

    // sim (figure / table recipes) ----------------------------------------
    auto* sim = app.add_subcommand("sim", "Figure and table reproduction recipes (plot-ready CSV)");
    sim->require_subcommand(1);
    recipes::RecipeOptions ro;
    std::string recipe_out;
    for (const auto& name : recipes::names()) {
        auto* r = sim->add_subcommand(name, "Recipe " + name);
        r->add_option("-n,--count", ro.n, "Paths / draws (0 = recipe default)");
        r->add_option("--seed", ro.seed, "Seed")->capture_default_str();
        r->add_option("--delta", ro.delta, "Time step where relevant (0 = recipe default)");
        r->add_option("--out", recipe_out, "Output CSV (default stdout)");
        r->callback([&, name] {
            action = [&, name] {
                ro.threads = threads;
                emit(recipe_out, recipes::run(name, ro).str(), out);
            };
        });
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? kExitOk : kExitIo;
    }

    try {
        if (action) action();
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

} // namespace diffsim::cli
