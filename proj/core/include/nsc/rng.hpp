#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace nsc {

/// mt19937_64 with fixed transforms to uniforms and normals, so streams are
/// identical across standard libraries (the std distributions are not).
class Rng {
 public:
  static constexpr int kVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Standard normal, Marsaglia polar method.
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Draws from a cumulative probability table (last entry ~ 1).
  std::size_t categorical(std::span<const double> cumulative);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Independent child seed for replicate or trial `counter`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter);

}  // namespace nsc
