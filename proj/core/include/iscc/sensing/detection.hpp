#pragma once

#include <cstddef>
#include <vector>

#include "iscc/sensing/waveform.hpp"

namespace iscc::sensing {

struct Detection {
  double range_m = 0.0;

  /// Normalized periodogram value |sum_occ x[n] e(n, r)|^2 / N_occ. On pure
  /// noise of variance sigma^2 per occupied bin this is sigma^2 * Exp(1).
  double statistic = 0.0;
};

struct DetectionResult {
  /// Cyclic local maxima above the threshold, strongest first.
  std::vector<Detection> detections;

  /// -noise_power * ln(pfa): the per-bin Neyman-Pearson level for the known
  /// noise floor carried by the snapshot. Zero for noiseless snapshots, in
  /// which case any nonzero bin detects.
  double threshold = 0.0;
};

/// Constant-false-alarm detector on the range periodogram of the occupied
/// subcarriers. `pfa` is the per-bin false alarm probability; the noise floor
/// is taken from snapshot.noise_power rather than estimated.
DetectionResult detect_targets(const FrequencySnapshot& snapshot, double pfa,
                               std::size_t oversample = 8);

}  // namespace iscc::sensing
