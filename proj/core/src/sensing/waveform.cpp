#include "iscc/sensing/waveform.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "iscc/common/errors.hpp"

namespace iscc::sensing {

SpectrumMask::SpectrumMask(std::vector<bool> occupied)
    : occupied_(std::move(occupied)) {
  if (occupied_.empty()) {
    throw InvalidInput("spectrum mask must not be empty");
  }
  for (std::size_t n = 0; n < occupied_.size(); ++n) {
    if (occupied_[n]) {
      indices_.push_back(n);
    }
  }
  occupied_count_ = indices_.size();
  if (occupied_count_ == 0) {
    throw InvalidInput("spectrum mask blanks every subcarrier");
  }
}

SpectrumMask SpectrumMask::with_gap(std::size_t num_subcarriers,
                                    std::size_t gap_subcarriers,
                                    std::size_t gap_start) {
  if (gap_subcarriers >= num_subcarriers) {
    throw InvalidInput("gap covers the whole band");
  }
  if (gap_start + gap_subcarriers > num_subcarriers) {
    throw InvalidInput("gap extends past the last subcarrier");
  }
  std::vector<bool> occ(num_subcarriers, true);
  for (std::size_t n = gap_start; n < gap_start + gap_subcarriers; ++n) {
    occ[n] = false;
  }
  return SpectrumMask(std::move(occ));
}

SpectrumMask SpectrumMask::with_central_gap(std::size_t num_subcarriers,
                                            std::size_t gap_subcarriers) {
  return with_gap(num_subcarriers, gap_subcarriers,
                  (num_subcarriers - gap_subcarriers) / 2);
}

SpectrumMask SpectrumMask::full(std::size_t num_subcarriers) {
  return SpectrumMask(std::vector<bool>(num_subcarriers, true));
}

std::vector<std::size_t> SpectrumMask::blanked_indices() const {
  std::vector<std::size_t> out;
  out.reserve(blanked_count());
  for (std::size_t n = 0; n < occupied_.size(); ++n) {
    if (!occupied_[n]) out.push_back(n);
  }
  return out;
}

std::complex<double> range_pole(const WaveformConfig& config, double range_m) {
  const double phase = -2.0 * std::numbers::pi * config.spacing_hz * 2.0 *
                       range_m / kSpeedOfLight;
  return std::polar(1.0, phase);
}

double range_from_pole(const WaveformConfig& config,
                       std::complex<double> pole) {
  double phase = -std::arg(pole);  // in (-pi, pi]
  if (phase < 0.0) phase += 2.0 * std::numbers::pi;
  return phase * kSpeedOfLight /
         (4.0 * std::numbers::pi * config.spacing_hz);
}

FrequencySnapshot synthesize_echo(const WaveformConfig& config,
                                  const std::vector<Target>& targets,
                                  const SpectrumMask& mask, double snr_db,
                                  Rng& rng) {
  if (mask.size() != config.num_subcarriers) {
    throw InvalidInput("mask size does not match subcarrier count");
  }
  for (const Target& t : targets) {
    if (t.range_m < 0.0 || t.range_m >= config.unambiguous_range()) {
      throw InvalidInput("target range outside the unambiguous interval");
    }
  }

  FrequencySnapshot snap;
  snap.config = config;
  snap.mask = mask;
  snap.samples.assign(config.num_subcarriers, {0.0, 0.0});

  double signal_power = 0.0;
  for (std::size_t n : mask.occupied_indices()) {
    std::complex<double> s{0.0, 0.0};
    for (const Target& t : targets) {
      const double phase = -2.0 * std::numbers::pi *
                           static_cast<double>(n) * config.spacing_hz * 2.0 *
                           t.range_m / kSpeedOfLight;
      s += t.amplitude * std::polar(1.0, phase);
    }
    snap.samples[n] = s;
    signal_power += std::norm(s);
  }
  signal_power /= static_cast<double>(mask.occupied_count());

  if (std::isfinite(snr_db) && signal_power > 0.0) {
    const double snr = std::pow(10.0, snr_db / 10.0);
    snap.noise_power = signal_power / snr;
    for (std::size_t n : mask.occupied_indices()) {
      snap.samples[n] += rng.complex_normal(snap.noise_power);
    }
  }
  return snap;
}

void apply_mask(std::vector<std::complex<double>>& samples,
                const SpectrumMask& mask) {
  if (samples.size() != mask.size()) {
    throw InvalidInput("sample vector size does not match mask");
  }
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (!mask.occupied(n)) samples[n] = {0.0, 0.0};
  }
}

}  // namespace iscc::sensing
