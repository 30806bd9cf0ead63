#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

namespace diffsim {

/// A sequential stream of binary64 values in [0,1). Values are never exactly
/// 0 (see each source for its remap) and never 1.
class UniformSource {
public:
    virtual ~UniformSource() = default;

    virtual double next() = 0;
    virtual std::unique_ptr<UniformSource> clone() const = 0;

    void fill(std::span<double> out) {
        for (double& v : out) v = next();
    }
};

struct LcgParams {
    std::uint64_t multiplier;
    std::uint64_t increment;
    std::uint64_t modulus;

    /// Park-Miller "minimal standard" constants (48271, 0, 2^31 - 1).
    static constexpr LcgParams minimal_standard() { return {48271u, 0u, 2147483647u}; }
    /// Spreadsheet-style 24-bit generator (1140671485, 12820163, 2^24).
    static constexpr LcgParams spreadsheet_compat() { return {1140671485u, 12820163u, 16777216u}; }
};

/// Linear congruential generator: state' = (m * state + c) mod M, value = state' / M.
/// A draw of exactly 0 is remapped to 1/M, the smallest positive value the
/// generator can otherwise emit.
class Lcg final : public UniformSource {
public:
    explicit Lcg(std::uint64_t seed, LcgParams params = LcgParams::minimal_standard());

    double next() override;
    std::unique_ptr<UniformSource> clone() const override { return std::make_unique<Lcg>(*this); }

    /// Advances the state without producing a value.
    std::uint64_t advance();

    std::uint64_t state() const { return state_; }
    const LcgParams& params() const { return params_; }

private:
    LcgParams params_;
    std::uint64_t state_;
};

/// True when n is prime (trial division; fine for the primes used here).
bool is_prime(std::uint64_t n);

/// The d-th prime, 1-based: nth_prime(1) == 2.
std::uint64_t nth_prime(std::uint32_t d);

/// Irrational translation of the torus: u_n = frac(n * sqrt(p)).
///
/// sqrt(p) is held as an unevaluated sum hi + lo, and n * hi is split exactly
/// with an FMA, so frac(n * sqrt(p)) stays accurate to ~1e-16 over the whole
/// supported index range instead of losing log2(n) bits.
class Torus final : public UniformSource {
public:
    /// Largest index for which the 1e-12 accuracy bound is guaranteed.
    static constexpr std::uint64_t kMaxIndex = 100'000'000;

    /// Throws std::invalid_argument if prime is not prime.
    explicit Torus(std::uint64_t prime, std::uint64_t counter = 0);

    static Torus from_prime_index(std::uint32_t d) { return Torus(nth_prime(d)); }

    /// Direct evaluation of u_n, n in [1, kMaxIndex]; throws std::out_of_range otherwise.
    double at(std::uint64_t n) const;

    /// Increments the counter and returns u at the new counter.
    double next() override;
    std::unique_ptr<UniformSource> clone() const override { return std::make_unique<Torus>(*this); }

    std::uint64_t prime() const { return prime_; }
    std::uint32_t prime_index() const { return prime_index_; }
    std::uint64_t counter() const { return counter_; }

    double sqrt_hi() const { return sqrt_hi_; }
    double sqrt_lo() const { return sqrt_lo_; }

private:
    std::uint64_t prime_;
    std::uint32_t prime_index_;
    std::uint64_t counter_;
    double sqrt_hi_;
    double sqrt_lo_;
};

/// Torus sequence read at randomized indices: the n-th delivered value is
/// u_{phi(n)} with phi(n) = floor(alpha * N * v) + 1, v drawn from the mixer.
/// Indices are drawn with replacement.
class MixedTorus final : public UniformSource {
public:
    static constexpr double kDefaultAlpha = 10.0;

    MixedTorus(Torus torus, std::unique_ptr<UniformSource> mixer, std::uint64_t capacity,
               double alpha = kDefaultAlpha);

    MixedTorus(const MixedTorus& other);
    MixedTorus& operator=(const MixedTorus& other);
    MixedTorus(MixedTorus&&) noexcept = default;
    MixedTorus& operator=(MixedTorus&&) noexcept = default;

    /// phi for a given mixer draw, clamped to [1, floor(alpha * N)].
    std::uint64_t index_for(double mixer_draw) const;

    double next() override;
    std::unique_ptr<UniformSource> clone() const override { return std::make_unique<MixedTorus>(*this); }

    const Torus& torus() const { return torus_; }
    std::uint64_t capacity() const { return capacity_; }
    double alpha() const { return alpha_; }

private:
    Torus torus_;
    std::unique_ptr<UniformSource> mixer_;
    std::uint64_t capacity_;
    double alpha_;
    std::uint64_t max_index_;
};

enum class SourceKind { lcg, lcg_compat, torus, mixed };

SourceKind parse_source_kind(const std::string& name);
std::string to_string(SourceKind kind);

/// Everything needed to build a uniform source reproducibly.
struct SourceSpec {
    SourceKind kind = SourceKind::lcg;
    std::uint64_t seed = 1;
    std::uint64_t prime = 2;
    /// Number of draws the consumer declares; used by the mixed torus only.
    std::uint64_t capacity = 0;
    double alpha = MixedTorus::kDefaultAlpha;
    /// Mixer prime when mixing the torus by another torus (0 = mix by LCG).
    std::uint64_t mixer_prime = 0;
};

std::unique_ptr<UniformSource> make_source(const SourceSpec& spec);

} // namespace diffsim
