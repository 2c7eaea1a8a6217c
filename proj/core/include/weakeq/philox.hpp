#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A draw is a
// pure function of (key, counter), so every Monte Carlo path can address its
// own random numbers without sharing state between threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace weakeq {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

  static constexpr Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Uniform on the open interval (0, 1) from 64 random bits. 52-bit
/// resolution keeps k + 1/2 exact, so the top value stays below 1.
inline double to_open_unit(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Standard normal and uniform variates addressed by counter.
class PathRng {
 public:
  /// Paths are indexed by 32 bits; `stream` separates independent experiments
  /// that share a seed.
  PathRng(std::uint64_t seed, std::uint32_t path, std::uint32_t stream)
      : key_(Philox4x32::key_from_seed(seed)), path_lo_(path), stream_(stream) {}

  /// Box-Muller normal for (block, node).
  [[nodiscard]] double normal(std::uint32_t block, std::uint32_t node) const {
    const auto w = Philox4x32::apply({path_lo_, stream_, block, node}, key_);
    const double u1 = to_open_unit(w[0], w[1]);
    const double u2 = to_open_unit(w[2], w[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform for (block, node) from a lane disjoint from normal().
  [[nodiscard]] double uniform(std::uint32_t block, std::uint32_t node) const {
    const auto w = Philox4x32::apply({path_lo_, stream_, block, node | kUniformLane}, key_);
    return to_open_unit(w[0], w[1]);
  }

  static constexpr std::uint32_t kUniformLane = 0x80000000u;

 private:
  Philox4x32::Key key_;
  std::uint32_t path_lo_;
  std::uint32_t stream_;
};

}  // namespace weakeq
