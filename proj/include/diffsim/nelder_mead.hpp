#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace diffsim {

struct NelderMeadOptions {
    /// Stop when max f - min f over the simplex <= f_tol_abs + f_tol_rel * |min f| ...
    double f_tol_abs = 1e-30;
    double f_tol_rel = 1e-10;
    /// ... or when the simplex diameter is below x_tol.
    double x_tol = 1e-10;
    std::size_t max_evaluations = 20000;
    /// Edge length of the initial simplex along each axis.
    double initial_step = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (standard reflection / expansion /
/// contraction / shrink coefficients 1, 2, 0.5, 0.5).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options = {});

} // namespace diffsim
