#pragma once

#include <cstdint>
#include <random>

namespace causig {

/// Portable random stream.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform and normal variates are derived here rather than through
/// <random> distributions, whose algorithms are implementation-defined:
///   uniform(): top 53 bits scaled by 2^-53, in [0, 1)
///   normal():  Marsaglia polar method on uniforms mapped to (-1, 1); the
///              second variate of each pair is cached.
/// Independent streams are keyed with derive_seed (SplitMix64 mixing).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Uniform integer in [0, bound), bound > 0, by rejection.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed for the stream identified by (seed, a, b).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace causig
