#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "iscc/common/rng.hpp"

namespace iscc::sensing {

inline constexpr double kSpeedOfLight = 299792458.0;

/// OFDM grid used for sensing. Only the subcarrier spacing and count matter
/// for range estimation; the carrier is kept for bookkeeping.
struct WaveformConfig {
  double carrier_hz = 24.0e9;
  double spacing_hz = 120.0e3;
  std::size_t num_subcarriers = 512;

  /// Largest range observable without phase wrapping across one subcarrier,
  /// c / (2 * spacing).
  double unambiguous_range() const { return kSpeedOfLight / (2.0 * spacing_hz); }
};

/// Point scatterer at a given one-way range with a complex reflection gain.
struct Target {
  double range_m = 0.0;
  std::complex<double> amplitude{1.0, 0.0};
};

/// Per-subcarrier occupancy. Blanked entries model spectrum handed over to
/// other users and carry no echo observation.
class SpectrumMask {
public:
  SpectrumMask() = default;
  explicit SpectrumMask(std::vector<bool> occupied);

  /// Mask with `gap_subcarriers` contiguous blanked entries starting at
  /// `gap_start` (everything else occupied).
  static SpectrumMask with_gap(std::size_t num_subcarriers,
                               std::size_t gap_subcarriers,
                               std::size_t gap_start);

  /// Gap centred in the band: start index (num - gap) / 2.
  static SpectrumMask with_central_gap(std::size_t num_subcarriers,
                                       std::size_t gap_subcarriers);

  static SpectrumMask full(std::size_t num_subcarriers);

  bool occupied(std::size_t n) const { return occupied_[n]; }
  std::size_t size() const { return occupied_.size(); }
  std::size_t occupied_count() const { return occupied_count_; }
  std::size_t blanked_count() const { return size() - occupied_count_; }
  const std::vector<std::size_t>& occupied_indices() const { return indices_; }
  std::vector<std::size_t> blanked_indices() const;

private:
  std::vector<bool> occupied_;
  std::vector<std::size_t> indices_;
  std::size_t occupied_count_ = 0;
};

/// One frequency-domain echo observation: the per-subcarrier channel samples
/// after matched filtering. Blanked subcarriers are identically zero.
struct FrequencySnapshot {
  WaveformConfig config;
  SpectrumMask mask;
  std::vector<std::complex<double>> samples;

  /// Variance of the complex noise added per occupied subcarrier. Zero for
  /// noiseless synthesis; used by detectors as the known noise floor.
  double noise_power = 0.0;
};

/// Phase rotation per subcarrier index for a scatterer at `range_m`:
/// exp(-j 2 pi n spacing 2 r / c) evaluated at n = 1.
std::complex<double> range_pole(const WaveformConfig& config, double range_m);

/// Inverse of range_pole: range implied by a pole's phase, folded into
/// [0, unambiguous_range).
double range_from_pole(const WaveformConfig& config, std::complex<double> pole);

/// Synthesizes the superimposed echo of `targets` on the occupied subcarriers,
/// adding circular complex noise at the requested per-sample SNR. The SNR is
/// relative to the mean power of the noiseless occupied samples; pass
/// +infinity for a noiseless snapshot. Targets must lie inside
/// [0, unambiguous_range).
FrequencySnapshot synthesize_echo(const WaveformConfig& config,
                                  const std::vector<Target>& targets,
                                  const SpectrumMask& mask, double snr_db,
                                  Rng& rng);

/// Zeroes every blanked subcarrier of `samples` in place. Synthesis already
/// produces blanked zeros; this exists to re-impose the constraint after a
/// caller has modified samples.
void apply_mask(std::vector<std::complex<double>>& samples,
                const SpectrumMask& mask);

}  // namespace iscc::sensing
