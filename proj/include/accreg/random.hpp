#pragma once

#include <cstdint>

namespace accreg {

// Counter-based generator: the value at index i depends only on (seed, i).
// Bits are produced by the SplitMix64 finalizer, so output is identical on
// every platform and independent of evaluation order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(mix(seed)) {}

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t index) const {
        return mix(key_ ^ (index * 0xd1b54a32d192ed03ULL));
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t index) const {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

    // Uniform on [-1, 1).
    double symmetric(std::uint64_t index) const { return 2.0 * uniform(index) - 1.0; }

private:
    std::uint64_t key_;
};

}  // namespace accreg
