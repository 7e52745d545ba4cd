#pragma once

#include <cstddef>

#include "iscc/sensing/all_pole.hpp"
#include "iscc/sensing/waveform.hpp"

namespace iscc::sensing {

struct RecoveryOptions {
  std::size_t max_iterations = 50;

  /// Stop when the relative l2 change of the blank samples between two
  /// consecutive iterations falls below this.
  double tolerance = 1e-6;

  AllPoleOptions all_pole;
};

struct RecoveryResult {
  /// Snapshot whose samples are the fitted model evaluated on every
  /// subcarrier: blanks are genuinely reconstructed, occupied entries are the
  /// model's (denoised) view of the observation. The mask is carried over
  /// unchanged so callers still know which entries were measured.
  FrequencySnapshot recovered;

  /// Final model, refitted on the converged sequence with the exact solver.
  AllPoleEstimate estimate;

  std::size_t iterations = 0;
  bool converged = false;
};

/// Alternating reconstruction of the blanked band: starting from zeros in the
/// gap, fit the all-pole model to the full-length sequence, re-solve the
/// amplitudes against the observed subcarriers only, rewrite the gap from the
/// model, and repeat until the gap stops moving. Running it on a gap-free
/// snapshot performs a single fit and returns the rank-truncated model.
///
/// Hitting max_iterations is reported through `converged`, not an error: the
/// partially recovered snapshot is still the best available estimate.
RecoveryResult recover_blank_band(const FrequencySnapshot& snapshot,
                                  std::size_t model_order,
                                  const RecoveryOptions& options = {});

}  // namespace iscc::sensing
