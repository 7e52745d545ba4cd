#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "doctest.h"
#include "iscc/common/errors.hpp"
#include "iscc/sensing/detection.hpp"

using namespace iscc;
using namespace iscc::sensing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FrequencySnapshot pure_noise(std::size_t n, double variance, Rng& rng) {
  FrequencySnapshot snap;
  snap.config.spacing_hz = 120.0e3;
  snap.config.num_subcarriers = n;
  snap.mask = SpectrumMask::full(n);
  snap.noise_power = variance;
  snap.samples.resize(n);
  for (auto& s : snap.samples) s = rng.complex_normal(variance);
  return snap;
}

}  // namespace

TEST_CASE("threshold is the inverse exponential tail at the known floor") {
  Rng rng(1);
  const auto snap = pure_noise(64, 2.5, rng);
  const auto res = detect_targets(snap, 0.01, 1);
  // Independent arithmetic: -2.5 ln(0.01) = 2.5 ln(100).
  CHECK(res.threshold == doctest::Approx(2.5 * std::log(100.0)).epsilon(1e-12));
}

TEST_CASE("noiseless unit target scores the coherent gain") {
  WaveformConfig cfg;
  cfg.spacing_hz = 120.0e3;
  cfg.num_subcarriers = 512;
  const std::size_t oversample = 8;
  const std::size_t nfft = cfg.num_subcarriers * oversample;

  // On-grid range so the whole energy lands in one bin.
  const double r = 1000.0 * 299792458.0 /
                   (2.0 * cfg.spacing_hz * static_cast<double>(nfft));
  Rng rng(2);
  const auto snap = synthesize_echo(cfg, {{r, {1.0, 0.0}}},
                                    SpectrumMask::full(cfg.num_subcarriers),
                                    kInf, rng);

  const auto res = detect_targets(snap, 1e-3, oversample);
  CHECK(res.threshold == 0.0);
  REQUIRE(!res.detections.empty());
  const Detection& top = res.detections.front();
  // |sum of N unit phasors|^2 / N = N.
  CHECK(top.statistic ==
        doctest::Approx(static_cast<double>(cfg.num_subcarriers))
            .epsilon(1e-9));
  CHECK(top.range_m == doctest::Approx(r).epsilon(1e-9));
}

TEST_CASE("false alarm rate on pure noise tracks pfa") {
  const double pfa = 0.02;
  const std::size_t bins = 64;
  const std::size_t snapshots = 3000;

  // A bin fires when it exceeds the threshold and beats both neighbours.
  // For iid Exp(1) bins that probability is pfa - pfa^2 + pfa^3 / 3.
  const double expected = pfa - pfa * pfa + pfa * pfa * pfa / 3.0;

  Rng rng(3);
  std::size_t alarms = 0;
  for (std::size_t s = 0; s < snapshots; ++s) {
    const auto snap = pure_noise(bins, 1.0, rng);
    alarms += detect_targets(snap, pfa, 1).detections.size();
  }
  const double rate =
      static_cast<double>(alarms) /
      static_cast<double>(bins * snapshots);

  // 4 sigma of the binomial spread around the oracle value.
  const double sigma = std::sqrt(expected * (1.0 - expected) /
                                 static_cast<double>(bins * snapshots));
  CHECK(rate > expected - 4.0 * sigma);
  CHECK(rate < expected + 4.0 * sigma);
}

TEST_CASE("strong targets rise above the threshold at 20 dB") {
  WaveformConfig cfg;
  cfg.spacing_hz = 120.0e3;
  cfg.num_subcarriers = 512;
  const std::vector<Target> targets = {{260.0, std::polar(1.0, 0.7)},
                                       {590.0, std::polar(1.0, -0.9)},
                                       {920.0, std::polar(1.0, 1.8)}};
  Rng rng(4);
  const auto snap = synthesize_echo(cfg, targets,
                                    SpectrumMask::full(cfg.num_subcarriers),
                                    20.0, rng);

  const auto res = detect_targets(snap, 1e-4);
  REQUIRE(res.detections.size() >= 3);
  for (const Target& t : targets) {
    double closest = 1e9;
    for (std::size_t i = 0; i < 3; ++i) {
      closest = std::min(closest,
                         std::abs(res.detections[i].range_m - t.range_m));
    }
    CHECK(closest < 1.0);
  }
}

TEST_CASE("detection rejects invalid arguments") {
  Rng rng(5);
  const auto snap = pure_noise(32, 1.0, rng);
  CHECK_THROWS_AS(detect_targets(snap, 0.0), InvalidInput);
  CHECK_THROWS_AS(detect_targets(snap, 1.0), InvalidInput);
  CHECK_THROWS_AS(detect_targets(snap, 0.1, 0), InvalidInput);
}
