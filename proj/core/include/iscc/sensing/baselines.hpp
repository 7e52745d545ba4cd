#pragma once

#include <cstddef>
#include <vector>

#include "iscc/sensing/waveform.hpp"

namespace iscc::sensing {

/// Discretized range response. `values` is method specific: linear magnitude
/// for the FFT profile, normalized power for the detector's periodogram.
struct RangeProfile {
  std::vector<double> range_axis;
  std::vector<double> values;
};

/// Zero-padded inverse DFT of the snapshot across `oversample * N` bins.
/// Blanked subcarriers contribute zeros, which is exactly the straw-man
/// behaviour the recovery is compared against.
RangeProfile fft_range_profile(const FrequencySnapshot& snapshot,
                               std::size_t oversample = 8);

/// Picks the `num_peaks` strongest cyclic local maxima of the FFT profile and
/// sharpens each with a three-point parabolic fit on log magnitude. Returns
/// ascending ranges; fewer than requested when the profile has fewer peaks.
std::vector<double> estimate_ranges_fft(const FrequencySnapshot& snapshot,
                                        std::size_t num_peaks,
                                        std::size_t oversample = 8);

/// Orthogonal matching pursuit over a uniform range grid restricted to the
/// occupied subcarriers, with a continuous local refinement of each selected
/// range and a full least-squares re-solve per iteration. Returns ascending
/// ranges, one per requested target.
std::vector<double> estimate_ranges_omp(const FrequencySnapshot& snapshot,
                                        std::size_t num_targets,
                                        double grid_spacing_m = 0.5);

}  // namespace iscc::sensing
