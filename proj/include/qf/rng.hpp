#pragma once

#include <cstdint>

namespace qf {

// Deterministic 64-bit generator (splitmix64). Used instead of <random>
// engines+distributions so that sequences are identical across platforms
// and standard-library implementations; every seeded result in the library
// must be bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Multiply-high mapping, no rejection.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi); collapses to lo when the interval is a point.
    double in_range(double lo, double hi) {
        return lo < hi ? lo + unit() * (hi - lo) : lo;
    }

    // Independent substream; does not advance this generator.
    Rng fork(std::uint64_t stream) const {
        std::uint64_t z = state_ ^ (0xd1b54a32d192ed03ull * (stream + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return Rng(z ^ (z >> 31));
    }

private:
    std::uint64_t state_;
};

} // namespace qf
