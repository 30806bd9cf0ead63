#pragma once

#include "diffsim/rng_core.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

namespace diffsim {

struct NormalPair {
    double x1;
    double x2;
};

/// Box-Muller: (sqrt(-2 ln u1) cos(2 pi u2), sqrt(-2 ln u1) sin(2 pi u2)).
/// Requires u1 in (0, 1]; throws std::domain_error otherwise.
NormalPair box_muller(double u1, double u2);

/// Beasley-Springer-Moro approximation of the inverse standard normal CDF.
/// Absolute error below 3e-9 on [1e-10, 1 - 1e-10]. Throws std::domain_error
/// outside (0, 1).
double moro_inverse_normal(double u);

/// Unit-rate exponential by inversion, -ln(1 - u); safe at u = 0.
double exponential_from_uniform(double u);

template <class InverseCdf>
double inverse_cdf_sample(InverseCdf&& inverse_cdf, double u) {
    return std::forward<InverseCdf>(inverse_cdf)(u);
}

/// Smallest N with V_1 + ... + V_{N+1} > lambda, where V_i are supplied by
/// next_exponential. Throws std::domain_error for negative or non-finite lambda.
std::uint64_t poisson_from_exponentials(double lambda, const std::function<double()>& next_exponential);

/// Poisson(lambda) variate from unit exponentials V_i = -ln(1 - u_i).
std::uint64_t poisson_sample(double lambda, UniformSource& src);

enum class NormalMethod { moro_inverse, box_muller };

NormalMethod parse_normal_method(const std::string& name);

/// Standard normal variates drawn from a uniform source. Moro inversion uses
/// one uniform per variate; Box-Muller consumes two per pair and caches the
/// second variate.
class NormalSource {
public:
    explicit NormalSource(std::unique_ptr<UniformSource> uniforms,
                          NormalMethod method = NormalMethod::moro_inverse);

    NormalSource(const NormalSource& other);
    NormalSource& operator=(const NormalSource& other);
    NormalSource(NormalSource&&) noexcept = default;
    NormalSource& operator=(NormalSource&&) noexcept = default;

    double next();
    void fill(std::span<double> out);

    NormalMethod method() const { return method_; }
    UniformSource& uniforms() { return *uniforms_; }

private:
    std::unique_ptr<UniformSource> uniforms_;
    NormalMethod method_;
    std::optional<double> cached_;
};

} // namespace diffsim
