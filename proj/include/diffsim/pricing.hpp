#pragma once

#include "diffsim/dist_transforms.hpp"
#include "diffsim/sde.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace diffsim {

/// European call on a lognormal underlying.
struct CallSpec {
    double spot;
    double strike;
    /// Continuously compounded risk-free rate, per year.
    double rate;
    double t_now;
    double t_expiry;
    double sigma;

    double tau() const { return t_expiry - t_now; }
    /// Throws std::invalid_argument unless spot > 0, strike > 0, tau >= 0, sigma >= 0.
    void validate() const;
};

/// Black-Scholes closed form. With sigma sqrt(tau) = 0 returns the
/// deterministic limit max(S - K e^{-r tau}, 0).
double bs_call_price(const CallSpec& spec);

struct PricingErrorReport {
    std::vector<std::size_t> n_sims;
    std::vector<double> estimates;
    /// (estimate - closed form) / closed form at each checkpoint.
    std::vector<double> relative_errors;
};

struct McCallResult {
    double estimate;
    PricingErrorReport report;
};

/// e^{-r tau} / n * sum (S_T^i - K)^+ over caller-supplied terminal prices.
double discounted_payoff_mean(const CallSpec& spec, std::span<const double> terminals);

/// Monte-Carlo call price with S_T drawn by one exact GBM step of size tau.
/// The report holds the running estimate and relative error at each
/// checkpoint (every 1000 draws when checkpoints is empty; n is always
/// included). Throws std::domain_error if the closed-form price is 0.
McCallResult mc_call_price(const CallSpec& spec, std::size_t n, NormalSource& normals,
                           std::span<const std::size_t> checkpoints = {});

/// Per-time cross-sectional mean of an ensemble.
std::vector<double> mean_path(const PathEnsemble& paths);

} // namespace diffsim
