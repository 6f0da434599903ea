#pragma once

// Per-ramp random streams. Each stream is a function of (master seed, index)
// only, so results do not depend on which worker ran which ramp.

#include <cstdint>
#include <random>

namespace jjqj {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

class RngStream {
public:
    RngStream(std::uint64_t master, std::uint64_t index) : engine_(derive_seed(master, index)) {}

    /// Uniform in [0, 1) with 53 random bits; identical on every platform.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace jjqj
