#include "diffsim/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace diffsim {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options) {
    const std::size_t dim = start.size();
    if (dim == 0) throw std::invalid_argument("nelder_mead: empty parameter vector");

    std::size_t evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? HUGE_VAL : v;
    };

    std::vector<std::vector<double>> simplex(dim + 1, start);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += options.initial_step;
    std::vector<double> values(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(dim + 1);
    auto blend = [dim](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> r(dim);
        for (std::size_t j = 0; j < dim; ++j) r[j] = a[j] + t * (b[j] - a[j]);
        return r;
    };

    bool converged = false;
    while (evals < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[dim - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                diameter = std::max(diameter, std::fabs(simplex[i][j] - simplex[best][j]));
        const double spread = values[worst] - values[best];
        if (spread <= options.f_tol_abs + options.f_tol_rel * std::fabs(values[best]) ||
            diameter <= options.x_tol) {
            converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j] / static_cast<double>(dim);
        }

        const auto reflected = blend(centroid, simplex[worst], -1.0);
        const double f_reflected = eval(reflected);
        if (f_reflected < values[best]) {
            const auto expanded = blend(centroid, simplex[worst], -2.0);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const auto contracted = outside ? blend(centroid, reflected, 0.5) : blend(centroid, simplex[worst], 0.5);
        const double f_contracted = eval(contracted);
        if (f_contracted < std::min(f_reflected, values[worst])) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) continue;
            simplex[i] = blend(simplex[best], simplex[i], 0.5);
            values[i] = eval(simplex[i]);
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best = static_cast<std::size_t>(best_it - values.begin());
    return {simplex[best], values[best], evals, converged};
}

} // namespace diffsim
