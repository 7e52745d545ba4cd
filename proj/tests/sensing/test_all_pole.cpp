#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "doctest.h"
#include "iscc/common/errors.hpp"
#include "iscc/sensing/all_pole.hpp"

using namespace iscc;
using namespace iscc::sensing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

WaveformConfig config(std::size_t n = 512) {
  WaveformConfig cfg;
  cfg.spacing_hz = 120.0e3;
  cfg.num_subcarriers = n;
  return cfg;
}

FrequencySnapshot noiseless(const WaveformConfig& cfg,
                            const std::vector<Target>& targets) {
  Rng rng(0);
  return synthesize_echo(cfg, targets, SpectrumMask::full(cfg.num_subcarriers),
                         kInf, rng);
}

}  // namespace

TEST_CASE("hankel_gram equals the direct Hankel product") {
  Rng rng(42);
  const std::size_t n = 40;
  const std::size_t pencil = 13;
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = rng.complex_normal(1.0);

  // Direct construction is the oracle.
  const std::size_t rows = n - pencil;
  const std::size_t cols = pencil + 1;
  Eigen::MatrixXcd hankel(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      hankel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          x[i + j];
    }
  }
  const Eigen::MatrixXcd direct = hankel.adjoint() * hankel;
  const Eigen::MatrixXcd fast = detail::hankel_gram(x, pencil);

  REQUIRE(fast.rows() == direct.rows());
  REQUIRE(fast.cols() == direct.cols());
  CHECK((fast - direct).norm() < 1e-11 * direct.norm());
}

TEST_CASE("refine_dominant_subspace converges on a known spectrum") {
  // G = Q diag(9, 5, 2, 1, 0.5, 0.1) Q^H with a fixed unitary Q.
  Rng rng(17);
  const Eigen::Index n = 6;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = rng.complex_normal(1.0);
    }
  }
  const Eigen::MatrixXcd q =
      Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ() *
      Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXd lambda(n);
  lambda << 9.0, 5.0, 2.0, 1.0, 0.5, 0.1;
  const Eigen::MatrixXcd gram = q * lambda.asDiagonal() * q.adjoint();

  Eigen::MatrixXcd start(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    start(i, 0) = rng.complex_normal(1.0);
    start(i, 1) = rng.complex_normal(1.0);
  }
  Eigen::VectorXd ritz;
  const Eigen::MatrixXcd basis =
      detail::refine_dominant_subspace(gram, start, 30, ritz);

  REQUIRE(ritz.size() == 2);
  CHECK(ritz(0) == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(ritz(1) == doctest::Approx(9.0).epsilon(1e-8));

  // Residual of the invariant-subspace equation measures subspace error.
  const Eigen::MatrixXcd residual =
      gram * basis - basis * (basis.adjoint() * gram * basis);
  CHECK(residual.norm() < 1e-7);
}

TEST_CASE("single noiseless target is recovered to machine precision") {
  const WaveformConfig cfg = config();
  const Target t{537.25, std::polar(0.9, 0.7)};
  const auto snap = noiseless(cfg, {t});

  const AllPoleEstimate est = estimate_all_pole(snap, 1);
  REQUIRE(est.poles.size() == 1);
  CHECK(std::abs(est.poles[0] - range_pole(cfg, t.range_m)) < 1e-9);
  CHECK(est.raw_pole_magnitudes[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(est.amplitudes[0] - t.amplitude) < 1e-9);

  const auto ranges = ranges_from_poles(cfg, est.poles);
  CHECK(ranges[0] == doctest::Approx(t.range_m).epsilon(1e-10));
}

TEST_CASE("three noiseless targets on the full band") {
  const WaveformConfig cfg = config();
  const std::vector<Target> targets = {{214.8, std::polar(1.0, 0.2)},
                                       {655.0, std::polar(1.0, -1.1)},
                                       {991.3, std::polar(1.0, 2.9)}};
  const auto snap = noiseless(cfg, targets);

  const AllPoleEstimate est = estimate_all_pole(snap, 3);
  const auto ranges = ranges_from_poles(cfg, est.poles);
  REQUIRE(ranges.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(ranges[i] - targets[i].range_m) < 1e-6);
    CHECK(std::abs(est.amplitudes[i] - targets[i].amplitude) < 1e-6);
  }

  // Output is sorted by implied range.
  CHECK(ranges[0] < ranges[1]);
  CHECK(ranges[1] < ranges[2]);
}

TEST_CASE("resynthesize reproduces the noiseless signal") {
  const WaveformConfig cfg = config(256);
  const std::vector<Target> targets = {{320.0, {0.5, 0.5}},
                                       {870.0, {-0.2, 0.9}}};
  const auto snap = noiseless(cfg, targets);
  const AllPoleEstimate est = estimate_all_pole(snap, 2);
  const auto rebuilt = resynthesize(est, cfg.num_subcarriers);
  for (std::size_t n = 0; n < cfg.num_subcarriers; ++n) {
    CHECK(std::abs(rebuilt[n] - snap.samples[n]) < 1e-8);
  }
}

TEST_CASE("rank deficiency reports the achieved rank") {
  const WaveformConfig cfg = config(128);
  const std::vector<Target> targets = {{300.0, {1.0, 0.0}},
                                       {700.0, {0.0, 1.0}}};
  const auto snap = noiseless(cfg, targets);

  try {
    estimate_all_pole(snap, 3);
    FAIL("expected DegenerateSignal");
  } catch (const DegenerateSignal& e) {
    CHECK(e.achieved_rank() == 2);
  }
}

TEST_CASE("all-zero input has rank zero") {
  const WaveformConfig cfg = config(64);
  const auto snap = noiseless(cfg, {});
  try {
    estimate_all_pole(snap, 1);
    FAIL("expected DegenerateSignal");
  } catch (const DegenerateSignal& e) {
    CHECK(e.achieved_rank() == 0);
  }
}

TEST_CASE("impossible problem sizes are rejected") {
  const WaveformConfig cfg = config(6);
  const auto snap = noiseless(cfg, {{100.0, {1.0, 0.0}}});
  CHECK_THROWS_AS(estimate_all_pole(snap, 4), UnidentifiableConfiguration);
  CHECK_THROWS_AS(estimate_all_pole(snap, 0), InvalidInput);

  AllPoleOptions bad;
  bad.pencil = 1;
  CHECK_THROWS_AS(estimate_all_pole(snap, 2, bad),
                  UnidentifiableConfiguration);
}

TEST_CASE("noisy estimates stay close at high SNR") {
  const WaveformConfig cfg = config();
  const std::vector<Target> targets = {{250.0, std::polar(1.0, 0.4)},
                                       {600.0, std::polar(1.0, 1.9)},
                                       {950.0, std::polar(1.0, -2.4)}};
  Rng rng(99);
  const auto snap = synthesize_echo(
      cfg, targets, SpectrumMask::full(cfg.num_subcarriers), 25.0, rng);

  const AllPoleEstimate est = estimate_all_pole(snap, 3);
  const auto ranges = ranges_from_poles(cfg, est.poles);
  REQUIRE(ranges.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(ranges[i] - targets[i].range_m) < 1.0);
  }
}
