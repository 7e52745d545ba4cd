#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

#include "iscc/sensing/waveform.hpp"

namespace iscc::sensing {

struct AllPoleOptions {
  /// Pencil parameter L: the Hankel matrix is (N-L) x (L+1). Zero picks
  /// N/3, the usual noise-robust choice.
  std::size_t pencil = 0;

  /// Singular values below rank_tolerance * sigma_max do not count towards
  /// the achieved rank. Must stay above sqrt(machine epsilon): the singular
  /// values come through the Gram matrix, which floors them near 1.5e-8
  /// relative.
  double rank_tolerance = 1e-6;
};

/// Damped-exponential model fitted to one snapshot:
///   x[n] ~ sum_m amplitudes[m] * poles[m]^n.
/// Poles are projected onto the unit circle (echo delays do not decay across
/// subcarriers); the raw magnitudes are kept for diagnostics. Entries are
/// sorted by the range each pole implies.
struct AllPoleEstimate {
  std::vector<std::complex<double>> poles;
  std::vector<double> raw_pole_magnitudes;
  std::vector<std::complex<double>> amplitudes;

  /// Hankel singular values, descending. Full spectrum from the exact path;
  /// the iterative refinement keeps only the leading block.
  std::vector<double> singular_values;
};

/// Fits `model_order` poles to the snapshot with a matrix pencil on the
/// Hankel matrix of the sample sequence. Blanked samples participate as
/// whatever value the vector currently holds (zero unless recovered), while
/// the amplitude least-squares uses only occupied subcarriers.
///
/// Throws DegenerateSignal when the Hankel numerical rank is below the model
/// order, and UnidentifiableConfiguration when the sequence or the occupied
/// set is too short to support the order at all.
AllPoleEstimate estimate_all_pole(const FrequencySnapshot& snapshot,
                                  std::size_t model_order,
                                  const AllPoleOptions& options = {});

/// Ranges implied by pole phases, sorted ascending.
std::vector<double> ranges_from_poles(
    const WaveformConfig& config,
    const std::vector<std::complex<double>>& poles);

/// Rebuilds sum_m amplitudes[m] * poles[m]^n for n = 0..num_samples-1.
std::vector<std::complex<double>> resynthesize(
    const AllPoleEstimate& estimate, std::size_t num_samples);

namespace detail {

/// Gram matrix Y^H Y of the Hankel matrix Y(i, j) = x[i + j] with
/// i < N - pencil, j <= pencil, computed by sliding correlations in
/// O(N * pencil) instead of the O(N * pencil^2) direct product.
Eigen::MatrixXcd hankel_gram(const std::vector<std::complex<double>>& samples,
                             std::size_t pencil);

/// A few orthogonal-iteration steps on a Hermitian PSD matrix, followed by a
/// Rayleigh-Ritz rotation. `basis` columns are the starting subspace; returns
/// the refined basis with Ritz values (ascending) in `eigenvalues`.
Eigen::MatrixXcd refine_dominant_subspace(const Eigen::MatrixXcd& gram,
                                          Eigen::MatrixXcd basis, int steps,
                                          Eigen::VectorXd& eigenvalues);

/// Pencil step + amplitude fit shared by the one-shot estimator and the
/// blank-band recovery loop. `subspace` holds an orthonormal basis of the
/// dominant right-singular subspace (model_order columns, largest last is
/// fine -- any basis of the span works); `sigma` its singular values,
/// descending. `observed` supplies the amplitude fit samples at
/// `observed_indices`.
AllPoleEstimate pencil_from_subspace(
    const WaveformConfig& config, const Eigen::MatrixXcd& subspace,
    const std::vector<double>& sigma,
    const std::vector<std::complex<double>>& observed,
    const std::vector<std::size_t>& observed_indices, std::size_t model_order,
    double rank_tolerance);

}  // namespace detail

}  // namespace iscc::sensing
