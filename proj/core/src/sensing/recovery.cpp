#include "iscc/sensing/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "iscc/common/errors.hpp"

namespace iscc::sensing {

namespace {

// Orthogonal iteration tracks the dominant subspace across recovery
// iterations. The Hankel changes only through the gap samples, so two block
// steps from the previous basis suffice; only the first iteration pays for an
// exact eigendecomposition.
constexpr int kWarmSteps = 2;
constexpr std::size_t kSubspaceSlack = 4;

std::vector<double> descending_sigma(const Eigen::VectorXd& eigenvalues) {
  std::vector<double> sigma(static_cast<std::size_t>(eigenvalues.size()));
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    sigma[sigma.size() - 1 - static_cast<std::size_t>(i)] =
        std::sqrt(std::max(0.0, eigenvalues(i)));
  }
  return sigma;
}

}  // namespace

RecoveryResult recover_blank_band(const FrequencySnapshot& snapshot,
                                  std::size_t model_order,
                                  const RecoveryOptions& options) {
  const std::size_t n = snapshot.samples.size();
  if (model_order == 0) {
    throw InvalidInput("model order must be at least 1");
  }
  if (options.max_iterations == 0) {
    throw InvalidInput("recovery needs at least one iteration");
  }
  const std::size_t pencil = options.all_pole.pencil
                                 ? options.all_pole.pencil
                                 : std::max(n / 3, model_order);
  if (pencil < model_order || pencil >= n ||
      n - pencil < model_order + 1) {
    throw UnidentifiableConfiguration(
        "sequence of " + std::to_string(n) +
        " samples cannot support model order " + std::to_string(model_order));
  }
  if (snapshot.mask.occupied_count() < model_order) {
    throw UnidentifiableConfiguration(
        "fewer occupied subcarriers than model parameters");
  }

  const std::vector<std::size_t> blanks = snapshot.mask.blanked_indices();
  const std::vector<std::size_t>& occupied = snapshot.mask.occupied_indices();
  const std::size_t block = std::min(model_order + kSubspaceSlack, pencil + 1);
  const auto order_cols = static_cast<Eigen::Index>(model_order);

  std::vector<std::complex<double>> filled = snapshot.samples;
  apply_mask(filled, snapshot.mask);

  RecoveryResult result;
  Eigen::MatrixXcd basis;
  std::vector<double> prev_blank(blanks.size() * 2, 0.0);

  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;

    const Eigen::MatrixXcd gram = detail::hankel_gram(filled, pencil);
    std::vector<double> sigma;
    if (iter == 1) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
      if (eig.info() != Eigen::Success) {
        throw DegenerateSignal("Hankel eigenproblem failed to converge", 0);
      }
      basis = eig.eigenvectors().rightCols(static_cast<Eigen::Index>(block));
      sigma = descending_sigma(eig.eigenvalues());
    } else {
      Eigen::VectorXd ritz;
      basis = detail::refine_dominant_subspace(gram, basis, kWarmSteps, ritz);
      sigma = descending_sigma(ritz);
    }

    const AllPoleEstimate estimate = detail::pencil_from_subspace(
        snapshot.config, basis.rightCols(order_cols), sigma, snapshot.samples,
        occupied, model_order, options.all_pole.rank_tolerance);

    // Rewrite the gap from the model and measure how far it moved.
    double delta_sq = 0.0;
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < blanks.size(); ++k) {
      const std::size_t idx = blanks[k];
      std::complex<double> value{0.0, 0.0};
      for (std::size_t m = 0; m < estimate.poles.size(); ++m) {
        value += estimate.amplitudes[m] *
                 std::pow(estimate.poles[m], static_cast<double>(idx));
      }
      const double dre = value.real() - prev_blank[2 * k];
      const double dim = value.imag() - prev_blank[2 * k + 1];
      delta_sq += dre * dre + dim * dim;
      norm_sq += std::norm(value);
      prev_blank[2 * k] = value.real();
      prev_blank[2 * k + 1] = value.imag();
      filled[idx] = value;
    }

    if (blanks.empty() ||
        delta_sq <= options.tolerance * options.tolerance * norm_sq) {
      result.converged = true;
      break;
    }
  }

  FrequencySnapshot final_snapshot = snapshot;
  final_snapshot.samples = filled;
  result.estimate =
      estimate_all_pole(final_snapshot, model_order, options.all_pole);

  result.recovered = snapshot;
  result.recovered.samples = resynthesize(result.estimate, n);
  return result;
}

}  // namespace iscc::sensing
