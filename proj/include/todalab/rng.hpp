#pragma once

#include <cstdint>

namespace todalab {

// SplitMix64. Every randomized suite in the project draws from this
// generator so that a run is reproducible from a single 64-bit seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [a,b)
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // uniform integer in [lo, hi]
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

} // namespace todalab
