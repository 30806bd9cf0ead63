#include "diffsim/rng_core.hpp"

#include <cmath>
#include <stdexcept>

namespace diffsim {

Lcg::Lcg(std::uint64_t seed, LcgParams params) : params_(params), state_(seed) {
    if (params_.modulus <= 1) throw std::invalid_argument("Lcg: modulus must exceed 1");
    if (params_.multiplier % params_.modulus == 0)
        throw std::invalid_argument("Lcg: multiplier must not be a multiple of the modulus");
    if (params_.increment >= params_.modulus)
        throw std::invalid_argument("Lcg: increment must lie in [0, modulus)");
    if (seed >= params_.modulus) throw std::invalid_argument("Lcg: seed must lie in [0, modulus)");
    if (seed == 0 && params_.increment == 0)
        throw std::invalid_argument("Lcg: seed 0 with zero increment is a fixed point");
}

std::uint64_t Lcg::advance() {
    __extension__ using u128 = unsigned __int128;
    const u128 next = static_cast<u128>(params_.multiplier) * state_ + params_.increment;
    state_ = static_cast<std::uint64_t>(next % params_.modulus);
    return state_;
}

double Lcg::next() {
    const std::uint64_t s = advance();
    const double m = static_cast<double>(params_.modulus);
    return s == 0 ? 1.0 / m : static_cast<double>(s) / m;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

std::uint64_t nth_prime(std::uint32_t d) {
    if (d == 0) throw std::invalid_argument("nth_prime: index is 1-based");
    std::uint32_t count = 0;
    for (std::uint64_t n = 2;; ++n) {
        if (is_prime(n) && ++count == d) return n;
    }
}

namespace {

std::uint32_t prime_index_of(std::uint64_t p) {
    std::uint32_t count = 0;
    for (std::uint64_t n = 2; n <= p; ++n)
        if (is_prime(n)) ++count;
    return count;
}

constexpr double kSmallestTorusDraw = 0x1p-53;

} // namespace

Torus::Torus(std::uint64_t prime, std::uint64_t counter)
    : prime_(prime), prime_index_(0), counter_(counter) {
    if (!is_prime(prime)) throw std::invalid_argument("Torus: " + std::to_string(prime) + " is not prime");
    if (counter > kMaxIndex) throw std::out_of_range("Torus: counter beyond precision bound");
    prime_index_ = prime_index_of(prime);
    const double p = static_cast<double>(prime);
    sqrt_hi_ = std::sqrt(p);
    // p - hi^2 is exact with an FMA; lo is the first Newton correction.
    sqrt_lo_ = std::fma(-sqrt_hi_, sqrt_hi_, p) / (2.0 * sqrt_hi_);
}

double Torus::at(std::uint64_t n) const {
    if (n == 0 || n > kMaxIndex) throw std::out_of_range("Torus: index outside [1, 1e8]");
    const double x = static_cast<double>(n);
    const double prod = x * sqrt_hi_;
    const double prod_err = std::fma(x, sqrt_hi_, -prod);
    double v = (prod - std::floor(prod)) + (prod_err + x * sqrt_lo_);
    v -= std::floor(v);
    if (v >= 1.0) v = std::nextafter(1.0, 0.0);
    if (v == 0.0) v = kSmallestTorusDraw;
    return v;
}

double Torus::next() {
    if (counter_ >= kMaxIndex) throw std::out_of_range("Torus: counter would exceed precision bound 1e8");
    return at(++counter_);
}

MixedTorus::MixedTorus(Torus torus, std::unique_ptr<UniformSource> mixer, std::uint64_t capacity,
                       double alpha)
    : torus_(std::move(torus)), mixer_(std::move(mixer)), capacity_(capacity), alpha_(alpha) {
    if (!mixer_) throw std::invalid_argument("MixedTorus: mixer required");
    if (capacity_ == 0) throw std::invalid_argument("MixedTorus: capacity must be positive");
    if (!(alpha_ >= 1.0) || !std::isfinite(alpha_)) throw std::invalid_argument("MixedTorus: alpha must be >= 1");
    const double span = alpha_ * static_cast<double>(capacity_);
    if (span > static_cast<double>(Torus::kMaxIndex))
        throw std::out_of_range("MixedTorus: alpha * N exceeds the torus precision bound");
    max_index_ = static_cast<std::uint64_t>(std::floor(span));
}

MixedTorus::MixedTorus(const MixedTorus& other)
    : torus_(other.torus_),
      mixer_(other.mixer_->clone()),
      capacity_(other.capacity_),
      alpha_(other.alpha_),
      max_index_(other.max_index_) {}

MixedTorus& MixedTorus::operator=(const MixedTorus& other) {
    if (this != &other) {
        MixedTorus tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

std::uint64_t MixedTorus::index_for(double mixer_draw) const {
    const double raw = std::floor(alpha_ * static_cast<double>(capacity_) * mixer_draw) + 1.0;
    if (raw < 1.0) return 1;
    const auto idx = static_cast<std::uint64_t>(raw);
    return idx > max_index_ ? max_index_ : idx;
}

double MixedTorus::next() {
    return torus_.at(index_for(mixer_->next()));
}

SourceKind parse_source_kind(const std::string& name) {
    if (name == "lcg") return SourceKind::lcg;
    if (name == "lcg-compat" || name == "lcg_compat") return SourceKind::lcg_compat;
    if (name == "torus") return SourceKind::torus;
    if (name == "mixed") return SourceKind::mixed;
    throw std::invalid_argument("unknown source '" + name + "'");
}

std::string to_string(SourceKind kind) {
    switch (kind) {
    case SourceKind::lcg: return "lcg";
    case SourceKind::lcg_compat: return "lcg-compat";
    case SourceKind::torus: return "torus";
    case SourceKind::mixed: return "mixed";
    }
    return "?";
}

std::unique_ptr<UniformSource> make_source(const SourceSpec& spec) {
    switch (spec.kind) {
    case SourceKind::lcg: return std::make_unique<Lcg>(spec.seed);
    case SourceKind::lcg_compat: return std::make_unique<Lcg>(spec.seed, LcgParams::spreadsheet_compat());
    case SourceKind::torus: return std::make_unique<Torus>(spec.prime);
    case SourceKind::mixed: {
        std::unique_ptr<UniformSource> mixer;
        if (spec.mixer_prime != 0)
            mixer = std::make_unique<Torus>(spec.mixer_prime);
        else
            mixer = std::make_unique<Lcg>(spec.seed);
        return std::make_unique<MixedTorus>(Torus(spec.prime), std::move(mixer), spec.capacity, spec.alpha);
    }
    }
    throw std::invalid_argument("make_source: unknown kind");
}

} // namespace diffsim
