#pragma once

#include <cstdint>
#include <random>

namespace ptcure {

// SplitMix64 finaliser; used to derive decorrelated seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for sub-stream `index` of a tagged family below `seed`. Equal inputs give
// equal outputs on every platform.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept;

/// Reproducible random source.
///
/// Generator identity (version 1): std::mt19937_64 whose single-word seed is
/// splitmix64(seed) ^ splitmix64(splitmix64(stream) + 0x9E3779B97F4A7C15).
/// Variates are produced by hand from raw 64-bit words instead of <random>
/// distributions, whose algorithms differ between standard libraries:
///   uniform()   ((w >> 11) + 0.5) * 2^-53, always in the open interval (0,1)
///   normal()    Marsaglia polar method, second value cached
class Rng {
 public:
  static constexpr int kVersion = 1;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lower, double upper) { return lower + (upper - lower) * uniform(); }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ptcure
