#pragma once

#include <vector>

#include "iscc/sensing/waveform.hpp"

namespace iscc::sensing {

/// Assignment-based range error for one trial: estimates are matched to true
/// ranges by the pairing that minimizes total absolute error plus
/// `miss_penalty_m` for every true target left unmatched, and the minimized
/// total is averaged over the true targets. A truth is left unmatched
/// whenever doing so is cheaper than the best available estimate, so wild
/// estimates cost at most the penalty.
///
/// Supports up to 20 true targets (the matching is exact, not greedy).
double armse(const std::vector<double>& estimated_ranges,
             const std::vector<double>& true_ranges,
             double miss_penalty_m = 100.0);

/// Cramer-Rao lower bound on the variance of each target's range estimate,
/// in m^2, for a known-noise snapshot observed on the occupied subcarriers.
/// Nuisance parameters are the real and imaginary parts of every complex
/// amplitude. The noise variance follows the synthesis convention: mean
/// noiseless occupied-sample power divided by the linear SNR.
///
/// Returned in the order of `targets`. Throws UnidentifiableConfiguration
/// when the information matrix is singular (e.g. coinciding ranges).
std::vector<double> range_crlb(const WaveformConfig& config,
                               const SpectrumMask& mask,
                               const std::vector<Target>& targets,
                               double snr_db);

}  // namespace iscc::sensing
