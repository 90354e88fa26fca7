#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tabsa {

/// One seed per subsystem. Each subsystem draws only from its own stream;
/// identical seeds plus identical config reproduce a simulation bit-exactly.
struct SeedSet {
    std::uint64_t map_seed = 0;
    std::uint64_t task_seed = 0;
    std::uint64_t pedestrian_seed = 0;
    std::uint64_t agent_seed = 0;
};

namespace detail {
// splitmix64 finalizer (Stafford mix13). Pure 64-bit mixing, no platform
// dependence.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

/// Derive a child seed from a parent seed and a label. Pure function: the
/// same (seed, label) pair always yields the same child, distinct labels
/// give distinct children with overwhelming probability.
inline std::uint64_t split(std::uint64_t parent_seed, std::string_view label) {
    if (label.empty()) {
        throw std::invalid_argument("split: label must be non-empty");
    }
    // FNV-1a over the label bytes, offset by the parent seed, then mixed.
    std::uint64_t h = 0xCBF29CE484222325ull ^ parent_seed;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return detail::mix64(h + 0x9E3779B97F4A7C15ull);
}

inline std::uint64_t split(std::uint64_t parent_seed, std::string_view label,
                           std::uint64_t index) {
    return split(parent_seed, std::string(label) + "/" + std::to_string(index));
}

/// Deterministic 64-bit stream (splitmix64). Value type: copying forks the
/// stream, each scenario run owns its streams exclusively.
///
/// All floating-point draws are derived from the integer stream by fixed
/// bit-level rules so that sequences are identical across platforms.
class RandomStream {
public:
    RandomStream() = default;
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return detail::mix64(state_);
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_u64(std::uint64_t n) {
        // Fixed-point multiply-shift; bias is negligible for simulation use
        // and the rule is branch-free and platform-stable.
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((u128(next_u64()) * u128(n)) >> 64);
    }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<int>(uniform_u64(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform_u64(n));
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller. Consumes exactly two draws.
    double gaussian() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_ = 0;
};

} // namespace tabsa
