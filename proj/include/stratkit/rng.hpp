#pragma once

#include <cstdint>
#include <random>

namespace stratkit {

/// Deterministic random stream: mt19937_64 (bit-exact across platforms, the
/// engine's output sequence is pinned by the standard) with inverse-CDF
/// normal draws instead of std::normal_distribution, whose output is
/// implementation-defined. Same seed, same stream, everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the inverse CDF.
  double normal();

  /// Uniform integer in [lo, hi], rejection sampling (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  static constexpr const char* algorithm() { return "mt19937_64/inverse-cdf"; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stratkit
