#include "iscc/sensing/metrics.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "iscc/common/errors.hpp"

namespace iscc::sensing {

double armse(const std::vector<double>& estimated_ranges,
             const std::vector<double>& true_ranges, double miss_penalty_m) {
  if (true_ranges.empty()) {
    throw InvalidInput("ARMSE needs at least one true target");
  }
  if (true_ranges.size() > 20) {
    throw InvalidInput("ARMSE matching supports at most 20 true targets");
  }
  if (miss_penalty_m < 0.0) {
    throw InvalidInput("miss penalty must be non-negative");
  }

  const std::size_t k = true_ranges.size();
  const std::size_t full = std::size_t{1} << k;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // dp[mask] = least cost of matching some prefix of the estimates to the
  // truth subset `mask`; estimates may also be skipped outright.
  std::vector<double> dp(full, kInf);
  dp[0] = 0.0;
  for (double est : estimated_ranges) {
    std::vector<double> next = dp;
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (dp[mask] == kInf) continue;
      for (std::size_t j = 0; j < k; ++j) {
        if (mask & (std::size_t{1} << j)) continue;
        const double cost = dp[mask] + std::abs(est - true_ranges[j]);
        const std::size_t to = mask | (std::size_t{1} << j);
        if (cost < next[to]) next[to] = cost;
      }
    }
    dp = std::move(next);
  }

  double best = kInf;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (dp[mask] == kInf) continue;
    const auto matched = static_cast<std::size_t>(std::popcount(mask));
    const double cost =
        dp[mask] + miss_penalty_m * static_cast<double>(k - matched);
    best = std::min(best, cost);
  }
  return best / static_cast<double>(k);
}

std::vector<double> range_crlb(const WaveformConfig& config,
                               const SpectrumMask& mask,
                               const std::vector<Target>& targets,
                               double snr_db) {
  if (targets.empty()) return {};
  if (mask.size() != config.num_subcarriers) {
    throw InvalidInput("mask size does not match subcarrier count");
  }
  const std::size_t m = targets.size();
  if (mask.occupied_count() < 3 * m) {
    throw UnidentifiableConfiguration(
        "fewer occupied subcarriers than unknown parameters");
  }
  if (!std::isfinite(snr_db)) {
    return std::vector<double>(m, 0.0);
  }

  const std::vector<std::size_t>& occ = mask.occupied_indices();
  const auto n_occ = static_cast<Eigen::Index>(occ.size());
  const double wavenumber =
      4.0 * std::numbers::pi * config.spacing_hz / kSpeedOfLight;

  // Mean noiseless power on the occupied set fixes the noise variance, the
  // same convention synthesize_echo uses.
  double signal_power = 0.0;
  Eigen::MatrixXcd modes(n_occ, static_cast<Eigen::Index>(m));
  for (Eigen::Index r = 0; r < n_occ; ++r) {
    const double n = static_cast<double>(occ[static_cast<std::size_t>(r)]);
    std::complex<double> sample{0.0, 0.0};
    for (std::size_t t = 0; t < m; ++t) {
      const std::complex<double> e =
          std::polar(1.0, -wavenumber * n * targets[t].range_m);
      modes(r, static_cast<Eigen::Index>(t)) = e;
      sample += targets[t].amplitude * e;
    }
    signal_power += std::norm(sample);
  }
  signal_power /= static_cast<double>(n_occ);
  if (signal_power <= 0.0) {
    throw UnidentifiableConfiguration("zero signal power, bound undefined");
  }
  const double noise_power =
      signal_power / std::pow(10.0, snr_db / 10.0);

  // Jacobian of the occupied-sample mean w.r.t. (r_t, Re b_t, Im b_t).
  const auto p = static_cast<Eigen::Index>(3 * m);
  Eigen::MatrixXcd jac(n_occ, p);
  for (Eigen::Index r = 0; r < n_occ; ++r) {
    const double n = static_cast<double>(occ[static_cast<std::size_t>(r)]);
    for (std::size_t t = 0; t < m; ++t) {
      const std::complex<double> e = modes(r, static_cast<Eigen::Index>(t));
      const auto col = static_cast<Eigen::Index>(3 * t);
      jac(r, col) = std::complex<double>(0.0, -wavenumber * n) *
                    targets[t].amplitude * e;
      jac(r, col + 1) = e;
      jac(r, col + 2) = std::complex<double>(0.0, 1.0) * e;
    }
  }

  const Eigen::MatrixXd fim =
      (2.0 / noise_power) * (jac.adjoint() * jac).real();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(fim);
  if (!lu.isInvertible()) {
    throw UnidentifiableConfiguration("singular Fisher information matrix");
  }
  const Eigen::MatrixXd cov = lu.inverse();

  std::vector<double> bounds(m);
  for (std::size_t t = 0; t < m; ++t) {
    bounds[t] = cov(static_cast<Eigen::Index>(3 * t),
                    static_cast<Eigen::Index>(3 * t));
  }
  return bounds;
}

}  // namespace iscc::sensing
