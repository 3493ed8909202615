#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace dcf {

/// Counter-based 64-bit generator (splitmix64): the state advances by a fixed
/// Weyl increment and the output is a bijective hash of it, so streams seeded
/// apart never correlate and replay is exact on every platform.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : state_(seed) {}

    /// Independent per-entity stream derived from (seed, stream id).
    static CounterRng stream(std::uint64_t seed, std::uint64_t id) {
        CounterRng mixer(seed + 0x9E3779B97F4A7C15ull * (id + 1));
        return CounterRng(mixer.next());
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in the open interval (0, 1).
    double uniform01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased enough via 128-bit multiply.
    std::uint32_t uniform_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(uniform01()) / rate;
    }

private:
    std::uint64_t state_;
};

}  // namespace dcf
