#pragma once

#include <cstddef>

// Distribution functions used by the statistical tests and the pricing code.

namespace diffsim {

/// Standard normal CDF, computed from the complementary error function.
double normal_cdf(double x);

double normal_pdf(double x);

/// P[chi2_dof > x], the chi-square survival function (regularized upper
/// incomplete gamma Q(dof/2, x/2)).
double chi_square_survival(double x, double dof);

/// Limiting Kolmogorov distribution K(y) = sum_k (-1)^k exp(-2 k^2 y^2).
/// For small y the equivalent theta-function form is summed instead, since
/// the alternating series converges too slowly there.
double kolmogorov_cdf(double y);

/// P[A_n^2 < z] for the Anderson-Darling statistic of a fully specified
/// continuous distribution: limiting law plus the finite-n correction of
/// Marsaglia & Marsaglia (2004).
double anderson_darling_cdf(double z, std::size_t n);

} // namespace diffsim
