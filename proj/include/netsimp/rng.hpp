#ifndef NETSIMP_RNG_HPP
#define NETSIMP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace netsimp {

/// Seedable RNG with explicitly defined distributions.
///
/// The standard <random> distributions are implementation-defined, which
/// would break bit-identical reproduction of masks and training runs across
/// toolchains. All draws here are spelled out on top of mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    /// Deterministically derives an independent stream, e.g. per sample.
    Rng fork(std::uint64_t stream) const { return Rng(mix(seed_, stream)); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(bounded(span));
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    /// Standard normal via Box-Muller (one value per call, no caching,
    /// so interleaved draws stay reproducible).
    double next_gauss() {
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    // Unbiased bounded draw by rejection.
    std::uint64_t bounded(std::uint64_t span) {
        if (span == 0) return engine_();
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % span;
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        // splitmix64 finalizer over the pair
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    std::uint64_t seed_{0};
};

}  // namespace netsimp

#endif  // NETSIMP_RNG_HPP
