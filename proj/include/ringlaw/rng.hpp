#pragma once

// Deterministic random streams for the Monte Carlo engine.
//
// Every task of an experiment gets its own generator seeded with
// child_seed(run_seed, task_index), so results do not depend on how tasks are
// scheduled across threads. Gaussians come from Box-Muller on top of
// std::mt19937_64, whose output sequence is fixed by the standard; the
// std::normal_distribution algorithm is implementation-defined and is avoided.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace ringlaw {

inline constexpr const char* kGeneratorId = "mt19937_64/splitmix64-child/box-muller";

/// One round of SplitMix64 finalization.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// mix(seed, i) = splitmix64(seed ^ splitmix64(i)).
constexpr std::uint64_t child_seed(std::uint64_t seed, std::uint64_t task_index) noexcept {
  return splitmix64(seed ^ splitmix64(task_index));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Box-Muller transform; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Complex standard Gaussian, E|g|^2 = 1.
  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ringlaw
