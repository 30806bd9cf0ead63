#include "diffsim/pricing.hpp"

#include "diffsim/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diffsim {

void CallSpec::validate() const {
    if (!(spot > 0.0)) throw std::invalid_argument("call: spot must be positive");
    if (!(strike > 0.0)) throw std::invalid_argument("call: strike must be positive");
    if (!(tau() >= 0.0)) throw std::invalid_argument("call: expiry precedes valuation time");
    if (!(sigma >= 0.0)) throw std::invalid_argument("call: sigma must be non-negative");
}

double bs_call_price(const CallSpec& spec) {
    spec.validate();
    const double tau = spec.tau();
    const double discounted_strike = spec.strike * std::exp(-spec.rate * tau);
    const double vol = spec.sigma * std::sqrt(tau);
    if (vol == 0.0) return std::max(spec.spot - discounted_strike, 0.0);
    const double d1 = (std::log(spec.spot / spec.strike) + (spec.rate + 0.5 * spec.sigma * spec.sigma) * tau) / vol;
    const double d2 = d1 - vol;
    return spec.spot * normal_cdf(d1) - discounted_strike * normal_cdf(d2);
}

double discounted_payoff_mean(const CallSpec& spec, std::span<const double> terminals) {
    if (terminals.empty()) throw std::invalid_argument("discounted_payoff_mean: no terminal prices");
    double sum = 0.0;
    for (double s : terminals) sum += std::max(s - spec.strike, 0.0);
    return std::exp(-spec.rate * spec.tau()) * sum / static_cast<double>(terminals.size());
}

McCallResult mc_call_price(const CallSpec& spec, std::size_t n, NormalSource& normals,
                           std::span<const std::size_t> checkpoints) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("mc_call_price: n must be positive");
    const double closed = bs_call_price(spec);
    if (!(closed > 0.0)) throw std::domain_error("mc_call_price: closed-form price is zero; relative error undefined");

    std::vector<std::size_t> marks(checkpoints.begin(), checkpoints.end());
    if (marks.empty())
        for (std::size_t m = 1000; m < n; m += 1000) marks.push_back(m);
    marks.push_back(n);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    marks.erase(std::remove_if(marks.begin(), marks.end(), [n](std::size_t m) { return m == 0 || m > n; }),
                marks.end());

    const GbmParams gbm{spec.spot, spec.rate, spec.sigma};
    const double tau = spec.tau();
    const double discount = std::exp(-spec.rate * tau);
    McCallResult out{};
    double payoff_sum = 0.0;
    std::size_t next_mark = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double st = tau > 0.0 ? gbm_exact_step(gbm, spec.spot, tau, normals.next()) : spec.spot;
        payoff_sum += std::max(st - spec.strike, 0.0);
        if (next_mark < marks.size() && marks[next_mark] == i) {
            const double estimate = discount * payoff_sum / static_cast<double>(i);
            out.report.n_sims.push_back(i);
            out.report.estimates.push_back(estimate);
            out.report.relative_errors.push_back((estimate - closed) / closed);
            ++next_mark;
        }
    }
    out.estimate = out.report.estimates.back();
    return out;
}

std::vector<double> mean_path(const PathEnsemble& paths) {
    if (paths.n_paths() == 0) throw std::invalid_argument("mean_path: empty ensemble");
    std::vector<double> mean(paths.grid().points(), 0.0);
    for (std::size_t i = 0; i < paths.n_paths(); ++i) {
        const auto p = paths.path(i);
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
    }
    for (double& m : mean) m /= static_cast<double>(paths.n_paths());
    return mean;
}

} // namespace diffsim
