#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace iscc {

/// splitmix64 step. Small, stateless, and good enough to whiten seed material.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Mixes an ordered list of words into one seed. Order-sensitive, so
/// (seed, experiment, trial) and (seed, trial, experiment) differ.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) noexcept;

/// Thin wrapper around mt19937_64 with the distributions used across the
/// simulators. One instance per trial keeps runs reproducible under any
/// scheduling of trials.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0);

  std::mt19937_64& engine() noexcept { return engine_; }

private:
  std::mt19937_64 engine_;
};

}  // namespace iscc
