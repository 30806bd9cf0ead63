#include "diffsim/dist_transforms.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace diffsim {

NormalPair box_muller(double u1, double u2) {
    if (!(u1 > 0.0 && u1 <= 1.0)) throw std::domain_error("box_muller: u1 must lie in (0, 1]");
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

namespace {

constexpr std::array<double, 4> kMoroA{2.50662823884, -18.61500062529, 41.39119773534, -25.44106049637};
constexpr std::array<double, 4> kMoroB{-8.47351093090, 23.08336743743, -21.06224101826, 3.13082909833};
constexpr std::array<double, 9> kMoroC{0.3374754822726147, 0.9761690190917186, 0.1607979714918209,
                                       0.0276438810333863, 0.0038405729373609, 0.0003951896511919,
                                       0.0000321767881768, 0.0000002888167364, 0.0000003960315187};

// The published seam is |u - 0.5| = 0.42; the rational part is already at
// 3.01e-9 error there while the tail polynomial is at 1e-11, so switch a
// little earlier.
constexpr double kMoroCentralHalfWidth = 0.41;

} // namespace

double moro_inverse_normal(double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("moro_inverse_normal: u must lie in (0, 1)");
    const double y = u - 0.5;
    if (std::fabs(y) < kMoroCentralHalfWidth) {
        const double r = y * y;
        const auto& a = kMoroA;
        const auto& b = kMoroB;
        return y * (((a[3] * r + a[2]) * r + a[1]) * r + a[0]) /
               ((((b[3] * r + b[2]) * r + b[1]) * r + b[0]) * r + 1.0);
    }
    double r = y > 0.0 ? 1.0 - u : u;
    r = std::log(-std::log(r));
    const auto& c = kMoroC;
    const double x =
        c[0] + r * (c[1] + r * (c[2] + r * (c[3] + r * (c[4] + r * (c[5] + r * (c[6] + r * (c[7] + r * c[8])))))));
    return y < 0.0 ? -x : x;
}

double exponential_from_uniform(double u) {
    return -std::log1p(-u);
}

std::uint64_t poisson_from_exponentials(double lambda, const std::function<double()>& next_exponential) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::domain_error("poisson: lambda must be finite and non-negative");
    std::uint64_t n = 0;
    double sum = next_exponential();
    while (sum <= lambda) {
        sum += next_exponential();
        ++n;
    }
    return n;
}

std::uint64_t poisson_sample(double lambda, UniformSource& src) {
    return poisson_from_exponentials(lambda, [&src] { return exponential_from_uniform(src.next()); });
}

NormalMethod parse_normal_method(const std::string& name) {
    if (name == "moro") return NormalMethod::moro_inverse;
    if (name == "box-muller" || name == "box_muller") return NormalMethod::box_muller;
    throw std::invalid_argument("unknown normal method '" + name + "'");
}

NormalSource::NormalSource(std::unique_ptr<UniformSource> uniforms, NormalMethod method)
    : uniforms_(std::move(uniforms)), method_(method) {
    if (!uniforms_) throw std::invalid_argument("NormalSource: uniform source required");
}

NormalSource::NormalSource(const NormalSource& other)
    : uniforms_(other.uniforms_->clone()), method_(other.method_), cached_(other.cached_) {}

NormalSource& NormalSource::operator=(const NormalSource& other) {
    if (this != &other) {
        NormalSource tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

double NormalSource::next() {
    if (method_ == NormalMethod::moro_inverse) return moro_inverse_normal(uniforms_->next());
    if (cached_) {
        const double v = *cached_;
        cached_.reset();
        return v;
    }
    const double u1 = uniforms_->next();
    const double u2 = uniforms_->next();
    const NormalPair pair = box_muller(u1, u2);
    cached_ = pair.x2;
    return pair.x1;
}

void NormalSource::fill(std::span<double> out) {
    for (double& v : out) v = next();
}

} // namespace diffsim
