#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace consensus {

/// splitmix64 finalizer (Steele/Lea/Flood). Used for seed derivation only;
/// simulation streams are mt19937_64 seeded from derived values.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Child-seed derivation, documented bit-exactly so parallel experiment runs
/// are reproducible regardless of scheduling:
///   s0 = splitmix64(master ^ fnv1a64(label))
///   s_{k+1} = splitmix64(s_k ^ index_k)
struct seed_seq64 {
    std::uint64_t state;

    explicit seed_seq64(std::uint64_t master, std::string_view label)
        : state(splitmix64(master ^ fnv1a64(label))) {}

    seed_seq64& with(std::uint64_t index) {
        state = splitmix64(state ^ index);
        return *this;
    }
    std::uint64_t value() const { return state; }
};

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0, std::uint64_t d = 0) {
    return seed_seq64(master, label).with(a).with(b).with(c).with(d).value();
}

using rng_t = std::mt19937_64;

/// Uniform double in (0, 1]; 53-bit resolution. Never returns 0, so
/// -log(u) is always finite.
inline double uniform_unit(rng_t& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Unbiased (rejection), portable across
/// standard libraries, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(rng_t& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x > limit);
    return x % n;
}

inline bool bernoulli(rng_t& rng, double p) { return uniform_unit(rng) <= p; }

} // namespace consensus
