#include "iscc/sensing/baselines.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "iscc/common/errors.hpp"

namespace iscc::sensing {

namespace {

constexpr double kLogFloor = 1e-300;

// Fractional peak offset from a parabola through three log-magnitude points.
double parabolic_offset(double left, double centre, double right) {
  const double denom = left - 2.0 * centre + right;
  if (denom == 0.0) return 0.0;
  const double delta = 0.5 * (left - right) / denom;
  return std::clamp(delta, -0.5, 0.5);
}

// Correlation of the occupied samples against a unit steering vector at
// range r, i.e. sum_k x[n_k] exp(+j phi n_k r).
std::complex<double> steer_correlation(const FrequencySnapshot& snap,
                                       const Eigen::VectorXcd& residual,
                                       const std::vector<std::size_t>& occ,
                                       double range_m) {
  const double phi = 4.0 * std::numbers::pi * snap.config.spacing_hz /
                     kSpeedOfLight;
  std::complex<double> acc{0.0, 0.0};
  for (Eigen::Index k = 0; k < residual.size(); ++k) {
    const double n = static_cast<double>(occ[static_cast<std::size_t>(k)]);
    acc += residual(k) * std::polar(1.0, phi * n * range_m);
  }
  return acc;
}

}  // namespace

RangeProfile fft_range_profile(const FrequencySnapshot& snapshot,
                               std::size_t oversample) {
  if (oversample == 0) {
    throw InvalidInput("oversample factor must be positive");
  }
  const std::size_t nfft = snapshot.samples.size() * oversample;
  std::vector<std::complex<double>> padded(nfft, {0.0, 0.0});
  std::copy(snapshot.samples.begin(), snapshot.samples.end(), padded.begin());

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> time;
  fft.inv(time, padded);

  RangeProfile profile;
  profile.range_axis.resize(nfft);
  profile.values.resize(nfft);
  const double bin_to_range = kSpeedOfLight / (2.0 * snapshot.config.spacing_hz *
                                               static_cast<double>(nfft));
  for (std::size_t k = 0; k < nfft; ++k) {
    profile.range_axis[k] = static_cast<double>(k) * bin_to_range;
    profile.values[k] = std::abs(time[k]);
  }
  return profile;
}

std::vector<double> estimate_ranges_fft(const FrequencySnapshot& snapshot,
                                        std::size_t num_peaks,
                                        std::size_t oversample) {
  const RangeProfile profile = fft_range_profile(snapshot, oversample);
  const std::size_t n = profile.values.size();

  std::vector<std::size_t> maxima;
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = profile.values[(k + n - 1) % n];
    const double next = profile.values[(k + 1) % n];
    if (profile.values[k] > prev && profile.values[k] >= next &&
        profile.values[k] > 0.0) {
      maxima.push_back(k);
    }
  }
  std::sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) {
    return profile.values[a] > profile.values[b];
  });
  if (maxima.size() > num_peaks) maxima.resize(num_peaks);

  const double bin_to_range = profile.range_axis[1];
  std::vector<double> ranges;
  ranges.reserve(maxima.size());
  for (std::size_t k : maxima) {
    const double l = std::log(std::max(profile.values[(k + n - 1) % n], kLogFloor));
    const double c = std::log(std::max(profile.values[k], kLogFloor));
    const double r = std::log(std::max(profile.values[(k + 1) % n], kLogFloor));
    const double bin = static_cast<double>(k) + parabolic_offset(l, c, r);
    ranges.push_back(bin * bin_to_range);
  }
  std::sort(ranges.begin(), ranges.end());
  return ranges;
}

std::vector<double> estimate_ranges_omp(const FrequencySnapshot& snapshot,
                                        std::size_t num_targets,
                                        double grid_spacing_m) {
  if (grid_spacing_m <= 0.0) {
    throw InvalidInput("grid spacing must be positive");
  }
  const std::vector<std::size_t>& occ = snapshot.mask.occupied_indices();
  const auto n_occ = static_cast<Eigen::Index>(occ.size());
  if (num_targets == 0) return {};
  if (occ.size() < num_targets) {
    throw UnidentifiableConfiguration(
        "fewer occupied subcarriers than requested targets");
  }

  const double r_max = snapshot.config.unambiguous_range();
  const auto grid_size =
      static_cast<std::size_t>(std::floor(r_max / grid_spacing_m));

  // Steering dictionary on the occupied subcarriers. All columns share the
  // same norm, so raw inner products rank atoms correctly.
  const double phi = -4.0 * std::numbers::pi * snapshot.config.spacing_hz /
                     kSpeedOfLight;
  Eigen::MatrixXcd dict(n_occ, static_cast<Eigen::Index>(grid_size));
  for (std::size_t g = 0; g < grid_size; ++g) {
    const double r = static_cast<double>(g) * grid_spacing_m;
    const std::complex<double> step = std::polar(1.0, phi * r);
    std::complex<double> cur{1.0, 0.0};
    Eigen::Index k = 0;
    for (std::size_t n = 0; n < snapshot.mask.size() && k < n_occ; ++n) {
      if (snapshot.mask.occupied(n)) {
        dict(k++, static_cast<Eigen::Index>(g)) = cur;
      }
      cur *= step;
    }
  }

  Eigen::VectorXcd observed(n_occ);
  for (Eigen::Index k = 0; k < n_occ; ++k) {
    observed(k) = snapshot.samples[occ[static_cast<std::size_t>(k)]];
  }

  std::vector<double> selected;
  Eigen::VectorXcd residual = observed;
  Eigen::MatrixXcd atoms(n_occ, static_cast<Eigen::Index>(num_targets));

  for (std::size_t t = 0; t < num_targets; ++t) {
    const Eigen::VectorXd scores =
        (dict.adjoint() * residual).cwiseAbs();
    Eigen::Index best = 0;
    scores.maxCoeff(&best);
    double r_best = static_cast<double>(best) * grid_spacing_m;

    // Golden-section polish inside +- one grid cell.
    {
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double lo = std::max(0.0, r_best - grid_spacing_m);
      double hi = std::min(r_max, r_best + grid_spacing_m);
      double a = hi - gr * (hi - lo);
      double b = lo + gr * (hi - lo);
      double fa = std::abs(steer_correlation(snapshot, residual, occ, a));
      double fb = std::abs(steer_correlation(snapshot, residual, occ, b));
      for (int it = 0; it < 40; ++it) {
        if (fa < fb) {
          lo = a;
          a = b;
          fa = fb;
          b = lo + gr * (hi - lo);
          fb = std::abs(steer_correlation(snapshot, residual, occ, b));
        } else {
          hi = b;
          b = a;
          fb = fa;
          a = hi - gr * (hi - lo);
          fa = std::abs(steer_correlation(snapshot, residual, occ, a));
        }
      }
      const double refined = 0.5 * (lo + hi);
      if (std::abs(steer_correlation(snapshot, residual, occ, refined)) >=
          scores(best)) {
        r_best = refined;
      }
    }

    selected.push_back(r_best);
    for (Eigen::Index k = 0; k < n_occ; ++k) {
      const double n = static_cast<double>(occ[static_cast<std::size_t>(k)]);
      atoms(k, static_cast<Eigen::Index>(t)) =
          std::polar(1.0, phi * n * r_best);
    }
    const auto active = atoms.leftCols(static_cast<Eigen::Index>(t + 1));
    const Eigen::VectorXcd coeff =
        active.colPivHouseholderQr().solve(observed);
    residual = observed - active * coeff;
  }

  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace iscc::sensing
