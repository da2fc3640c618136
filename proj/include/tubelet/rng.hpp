#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace tubelet {

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence is
// fully specified by the standard) and derives all floating-point and integer
// draws from raw engine words, so identical seeds give bit-identical streams
// on every platform and compiler.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53 bits of precision.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [lo, hi], both inclusive. Masked rejection, unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) {  // full 64-bit span
            return static_cast<std::int64_t>(next_u64());
        }
        std::uint64_t mask = range - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        std::uint64_t v;
        do {
            v = next_u64() & mask;
        } while (v >= range);
        return lo + static_cast<std::int64_t>(v);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Gaussian via Box-Muller on engine words (std::normal_distribution is
    // implementation-defined, so it cannot be used for reproducible streams).
    double normal() {
        double u1 = 0.0;
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::mt19937_64 engine_;
};

namespace detail {
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Seed-split function: every source of randomness in the pipeline derives its
// own child seed from one root seed plus a stream label (and optional index),
// so any artifact is reproducible from a single integer.
//
//   child = splitmix64(seed ^ fnv1a64(label))
//   child = splitmix64(splitmix64(seed ^ fnv1a64(label)) ^ index)
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
    return detail::splitmix(seed ^ detail::fnv1a(stream));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                                 std::uint64_t index) {
    return detail::splitmix(derive_seed(seed, stream) ^ index);
}

}  // namespace tubelet
