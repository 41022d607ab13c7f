#pragma once

#include <cmath>
#include <cstdint>

namespace spen::rng {

// Counter-based generation: every draw is a pure function of (seed, index),
// so results do not depend on evaluation order and streams can be split by
// deriving sub-seeds.

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += golden_gamma;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent sub-seed for stream `tag` of `seed`.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(splitmix64(seed) ^ splitmix64(tag ^ 0xD1B54A32D192ED03ull));
}

/// Top 53 bits as a double in [0, 1).
inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

inline double uniform_at(std::uint64_t seed, std::uint64_t index) {
    return to_unit(splitmix64(splitmix64(seed) ^ (golden_gamma * (index + 1))));
}

/// Standard normal via Box-Muller on two counter draws.
inline double normal_at(std::uint64_t seed, std::uint64_t index) {
    const double u1 = 1.0 - uniform_at(seed, 2 * index);  // (0, 1], keeps the log finite
    const double u2 = uniform_at(seed, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Small sequential stream for drawing short tuples (e.g. stencil weights).
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(splitmix64(seed)) {}

    std::uint64_t next() {
        state_ += golden_gamma;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double next_unit() { return to_unit(next()); }

private:
    std::uint64_t state_;
};

}  // namespace spen::rng
