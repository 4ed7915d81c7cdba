#pragma once

#include <cstdint>
#include <random>

namespace pathint {

/// SplitMix64 step; used to derive independent per-path stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stream seed for (scenario seed, path index): mixes the pair so that
/// nearby indices give unrelated engine states.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximation, accurate to ~1e-16 relative in the central range).
double normal_icdf(double p);

/// Per-path random source. mt19937_64 is bit-exactly specified by the
/// standard and the uniforms/transforms below avoid std::*_distribution,
/// whose output is implementation-defined; identical (seed, index) give
/// identical draws on every platform.
class PathRng {
public:
    explicit PathRng(std::uint64_t stream_seed) : eng_(stream_seed) {}

    /// Uniform on (0,1), never exactly 0 or 1.
    double uniform01() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double gaussian() { return normal_icdf(uniform01()); }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

    /// Uniform on [-half_width, half_width].
    double symmetric_uniform(double half_width) {
        return (2.0 * uniform01() - 1.0) * half_width;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace pathint
