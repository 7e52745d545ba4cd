#include "iscc/sensing/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <numbers>

#include "iscc/common/errors.hpp"
#include "iscc/sensing/all_pole.hpp"
#include "iscc/sensing/baselines.hpp"
#include "iscc/sensing/metrics.hpp"
#include "iscc/sensing/recovery.hpp"

namespace iscc::sensing {

namespace {

constexpr std::uint64_t kExperimentTag = 0x53454e53ULL;  // "SENS"

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

std::uint64_t snr_bits(double snr_db) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(snr_db));
  std::memcpy(&bits, &snr_db, sizeof(bits));
  return bits;
}

}  // namespace

SpectrumMask experiment_mask(const SensingExperimentConfig& config) {
  if (config.gap_subcarriers == 0) {
    return SpectrumMask::full(config.waveform.num_subcarriers);
  }
  if (config.gap_position == "center") {
    return SpectrumMask::with_central_gap(config.waveform.num_subcarriers,
                                          config.gap_subcarriers);
  }
  std::size_t start = 0;
  try {
    start = std::stoul(config.gap_position);
  } catch (const std::exception&) {
    throw InvalidInput("gap_position must be \"center\" or a start index");
  }
  return SpectrumMask::with_gap(config.waveform.num_subcarriers,
                                config.gap_subcarriers, start);
}

std::vector<Target> draw_targets(std::size_t count, Rng& rng,
                                 double range_min, double range_max,
                                 double min_separation) {
  std::vector<Target> targets;
  targets.reserve(count);
  while (targets.size() < count) {
    const double r = rng.uniform(range_min, range_max);
    bool clear = true;
    for (const Target& t : targets) {
      if (std::abs(t.range_m - r) < min_separation) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    targets.push_back({r, std::polar(1.0, phase)});
  }
  return targets;
}

std::vector<SensingTrialRow> run_sensing_experiment(
    const SensingExperimentConfig& config) {
  if (config.snr_db_list.empty()) {
    throw InvalidInput("snr_db_list must not be empty");
  }
  if (config.trials == 0) {
    throw InvalidInput("trials must be positive");
  }

  const SpectrumMask mask = experiment_mask(config);
  std::vector<SensingTrialRow> rows;
  rows.reserve(config.snr_db_list.size() * config.trials * 3);

  for (double snr_db : config.snr_db_list) {
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      Rng rng(derive_seed(
          {config.seed, kExperimentTag, snr_bits(snr_db), trial}));
      const std::vector<Target> targets =
          draw_targets(config.model_order, rng);
      std::vector<double> truth;
      truth.reserve(targets.size());
      for (const Target& t : targets) truth.push_back(t.range_m);

      const FrequencySnapshot snapshot =
          synthesize_echo(config.waveform, targets, mask, snr_db, rng);

      {
        SensingTrialRow row{"proposed", snr_db, trial, 0.0, 0.0, true};
        const auto start = std::chrono::steady_clock::now();
        const RecoveryResult rec =
            recover_blank_band(snapshot, config.model_order);
        const std::vector<double> est =
            ranges_from_poles(config.waveform, rec.estimate.poles);
        row.runtime_ms = elapsed_ms(start);
        row.armse_m = armse(est, truth);
        row.converged = rec.converged;
        rows.push_back(std::move(row));
      }
      {
        SensingTrialRow row{"fft", snr_db, trial, 0.0, 0.0, true};
        const auto start = std::chrono::steady_clock::now();
        const std::vector<double> est =
            estimate_ranges_fft(snapshot, config.model_order);
        row.runtime_ms = elapsed_ms(start);
        row.armse_m = armse(est, truth);
        rows.push_back(std::move(row));
      }
      {
        SensingTrialRow row{"omp", snr_db, trial, 0.0, 0.0, true};
        const auto start = std::chrono::steady_clock::now();
        const std::vector<double> est =
            estimate_ranges_omp(snapshot, config.model_order);
        row.runtime_ms = elapsed_ms(start);
        row.armse_m = armse(est, truth);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace iscc::sensing
