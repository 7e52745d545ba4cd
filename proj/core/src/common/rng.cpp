#include "iscc/common/rng.hpp"

#include <cmath>

namespace iscc {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t state = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t w : words) {
    state = splitmix64(state ^ w);
  }
  return state;
}

std::complex<double> Rng::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  std::normal_distribution<double> dist(0.0, s);
  const double re = dist(engine_);
  const double im = dist(engine_);
  return {re, im};
}

}  // namespace iscc
