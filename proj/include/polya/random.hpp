#pragma once

#include <cstdint>
#include <random>

namespace polya {

// SplitMix64 finalizer applied to base_seed + (rep + 1) * 0x9E3779B97F4A7C15.
// Fixed forever: changing it changes every emitted file.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t rep) noexcept;

/// Uniform variates on [0, 1) built from the top 53 bits of mt19937_64. Both
/// the engine and the bit-to-double map are fully specified, so streams are
/// identical on every conforming platform (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace polya
