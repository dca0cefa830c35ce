#pragma once

// Deterministic splittable randomness for the Monte Carlo layer. Each
// experiment gets its own SplitMix64 stream derived from (master seed,
// experiment index), so results never depend on scheduling or thread count.

#include <cstdint>

namespace twophoton {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

// Stream for one experiment. The index is scrambled through the golden-ratio
// increment before mixing so consecutive indices land at unrelated states.
inline SplitMix64 derive_stream(std::uint64_t master_seed, std::uint64_t index) {
    return SplitMix64(mix64(master_seed + 0x9E3779B97F4A7C15ull * (index + 1)));
}

}  // namespace twophoton
