#pragma once

#include <cmath>
#include <cstdint>

#include "sps/units.hpp"

// Counter-based random numbers. Every draw is a pure function of (key, counter),
// so any record, pulse, or trajectory can be regenerated independently of
// iteration order. Keys for sub-streams are derived from a root seed plus an
// integer label; the same (seed, label, counter) triple always yields the same
// value.

namespace sps {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t label) {
    return mix64(key ^ mix64(label + kGoldenGamma));
}

inline std::uint64_t bits_at(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + kGoldenGamma * (counter + 1));
}

// Uniform in [0, 1) with 53 significant bits.
inline double u01_at(std::uint64_t key, std::uint64_t counter) {
    return static_cast<double>(bits_at(key, counter) >> 11) * 0x1.0p-53;
}

// Sequential view over one key. Still counter-based underneath: the n-th draw
// from a given key is reproducible regardless of how the stream is consumed.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_bits() { return bits_at(key_, counter_++); }

    double u01() { return static_cast<double>(next_bits() >> 11) * 0x1.0p-53; }

    // Exponential with the given rate (inverse units of the result).
    double exponential(double rate) { return -std::log1p(-u01()) / rate; }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01();
        double u2 = u01();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace sps
