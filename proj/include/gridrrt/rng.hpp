#pragma once

#include <cstdint>

namespace gridrrt {

// Counter-based SplitMix64 stream.
//
// The k-th output is a pure function of (seed, stream, k):
//
//   base   = mix64(seed ^ mix64(0x85EBCA77C2B2AE63 + stream))
//   out(k) = mix64(base + (k + 1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the SplitMix64 finalizer (Steele, Lea & Flood 2014).
// Pure 64-bit integer arithmetic, so sequences are identical on every
// platform, and independent streams derived from one seed never share
// state. Stream 0 and stream 1 are used for discrete-mode and
// continuous-variable sampling respectively.
class SplitMix64 {
public:
    SplitMix64() : SplitMix64(0, 0) {}

    SplitMix64(std::uint64_t seed, std::uint64_t stream)
        : base_(mix64(seed ^ mix64(0x85EBCA77C2B2AE63ULL + stream))), counter_(0) {}

    std::uint64_t next_u64() {
        ++counter_;
        return mix64(base_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform on [0, 1): top 53 bits scaled by 2^-53.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

    // Uniform on (lo, hi]; used for circular ranges declared open at the left end.
    double uniform_open_closed(double lo, double hi) { return hi - next_double() * (hi - lo); }

    // Uniform integer in [0, n); n must be >= 1.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    }

    std::uint64_t counter() const { return counter_; }

    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_;
};

}  // namespace gridrrt
