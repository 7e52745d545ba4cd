#include "iscc/sensing/all_pole.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iscc/common/errors.hpp"

namespace iscc::sensing {

namespace detail {

Eigen::MatrixXcd hankel_gram(const std::vector<std::complex<double>>& samples,
                             std::size_t pencil) {
  const std::size_t n = samples.size();
  const std::size_t cols = pencil + 1;
  const std::size_t rows = n - pencil;
  Eigen::MatrixXcd gram(cols, cols);

  // G(j, j+d) slides by one sample as j advances, so each diagonal costs one
  // full correlation plus O(1) updates per entry.
  for (std::size_t d = 0; d < cols; ++d) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < rows; ++i) {
      acc += std::conj(samples[i]) * samples[i + d];
    }
    gram(0, d) = acc;
    for (std::size_t j = 0; j + d + 1 < cols; ++j) {
      acc -= std::conj(samples[j]) * samples[j + d];
      acc += std::conj(samples[rows + j]) * samples[rows + j + d];
      gram(j + 1, j + 1 + d) = acc;
    }
  }
  gram = gram.selfadjointView<Eigen::Upper>();
  return gram;
}

Eigen::MatrixXcd refine_dominant_subspace(const Eigen::MatrixXcd& gram,
                                          Eigen::MatrixXcd basis, int steps,
                                          Eigen::VectorXd& eigenvalues) {
  const auto k = basis.cols();
  for (int s = 0; s < steps; ++s) {
    Eigen::MatrixXcd prod = gram.selfadjointView<Eigen::Lower>() * basis;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(prod);
    basis = qr.householderQ() * Eigen::MatrixXcd::Identity(gram.rows(), k);
  }
  const Eigen::MatrixXcd small =
      basis.adjoint() * (gram.selfadjointView<Eigen::Lower>() * basis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(small);
  eigenvalues = eig.eigenvalues();
  return basis * eig.eigenvectors();
}

AllPoleEstimate pencil_from_subspace(
    const WaveformConfig& config, const Eigen::MatrixXcd& subspace,
    const std::vector<double>& sigma,
    const std::vector<std::complex<double>>& observed,
    const std::vector<std::size_t>& observed_indices, std::size_t model_order,
    double rank_tolerance) {
  const auto m = static_cast<Eigen::Index>(model_order);
  const double sigma_max = sigma.empty() ? 0.0 : sigma.front();
  std::size_t rank = 0;
  for (double s : sigma) {
    if (s > rank_tolerance * sigma_max && sigma_max > 0.0) ++rank;
  }
  if (rank < model_order) {
    throw DegenerateSignal(
        "signal supports rank " + std::to_string(rank) +
            ", model order is " + std::to_string(model_order),
        rank);
  }

  // Shift-invariance pencil: with V spanning the dominant right-singular
  // subspace, eig(pinv(V1) V2) recovers the conjugated poles.
  const Eigen::MatrixXcd v1 = subspace.topRows(subspace.rows() - 1);
  const Eigen::MatrixXcd v2 = subspace.bottomRows(subspace.rows() - 1);
  const Eigen::MatrixXcd shift =
      (v1.adjoint() * v1).ldlt().solve(v1.adjoint() * v2);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(shift);
  if (eig.info() != Eigen::Success) {
    throw DegenerateSignal("pencil eigenproblem failed to converge", rank);
  }

  AllPoleEstimate est;
  est.poles.resize(model_order);
  est.raw_pole_magnitudes.resize(model_order);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::complex<double> raw = std::conj(eig.eigenvalues()(i));
    const double mag = std::abs(raw);
    est.raw_pole_magnitudes[i] = mag;
    est.poles[i] = mag > 0.0 ? raw / mag : std::complex<double>(1.0, 0.0);
  }

  std::vector<std::size_t> order(model_order);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return range_from_pole(config, est.poles[a]) <
           range_from_pole(config, est.poles[b]);
  });
  AllPoleEstimate sorted;
  sorted.poles.reserve(model_order);
  sorted.raw_pole_magnitudes.reserve(model_order);
  for (std::size_t idx : order) {
    sorted.poles.push_back(est.poles[idx]);
    sorted.raw_pole_magnitudes.push_back(est.raw_pole_magnitudes[idx]);
  }
  sorted.singular_values = sigma;

  // Amplitudes by least squares on the observed samples only.
  const auto rows = static_cast<Eigen::Index>(observed_indices.size());
  Eigen::MatrixXcd vand(rows, m);
  Eigen::VectorXcd rhs(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto n = observed_indices[static_cast<std::size_t>(r)];
    rhs(r) = observed[n];
    for (Eigen::Index c = 0; c < m; ++c) {
      vand(r, c) = std::pow(sorted.poles[static_cast<std::size_t>(c)],
                            static_cast<double>(n));
    }
  }
  const Eigen::VectorXcd amp = vand.colPivHouseholderQr().solve(rhs);
  sorted.amplitudes.assign(amp.data(), amp.data() + amp.size());
  return sorted;
}

}  // namespace detail

AllPoleEstimate estimate_all_pole(const FrequencySnapshot& snapshot,
                                  std::size_t model_order,
                                  const AllPoleOptions& options) {
  const std::size_t n = snapshot.samples.size();
  if (model_order == 0) {
    throw InvalidInput("model order must be at least 1");
  }
  const std::size_t pencil =
      options.pencil ? options.pencil : std::max(n / 3, model_order);
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

  const Eigen::MatrixXcd gram = detail::hankel_gram(snapshot.samples, pencil);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw DegenerateSignal("Hankel eigenproblem failed to converge", 0);
  }

  const auto cols = gram.cols();
  const auto m = static_cast<Eigen::Index>(model_order);
  Eigen::MatrixXcd subspace = eig.eigenvectors().rightCols(m);
  std::vector<double> sigma(static_cast<std::size_t>(cols));
  for (Eigen::Index i = 0; i < cols; ++i) {
    sigma[static_cast<std::size_t>(i)] =
        std::sqrt(std::max(0.0, eig.eigenvalues()(cols - 1 - i)));
  }

  return detail::pencil_from_subspace(
      snapshot.config, subspace, sigma, snapshot.samples,
      snapshot.mask.occupied_indices(), model_order, options.rank_tolerance);
}

std::vector<double> ranges_from_poles(
    const WaveformConfig& config,
    const std::vector<std::complex<double>>& poles) {
  std::vector<double> ranges;
  ranges.reserve(poles.size());
  for (const auto& p : poles) {
    ranges.push_back(range_from_pole(config, p));
  }
  std::sort(ranges.begin(), ranges.end());
  return ranges;
}

std::vector<std::complex<double>> resynthesize(const AllPoleEstimate& estimate,
                                               std::size_t num_samples) {
  std::vector<std::complex<double>> out(num_samples, {0.0, 0.0});
  for (std::size_t m = 0; m < estimate.poles.size(); ++m) {
    std::complex<double> power{1.0, 0.0};
    for (std::size_t n = 0; n < num_samples; ++n) {
      out[n] += estimate.amplitudes[m] * power;
      power *= estimate.poles[m];
    }
  }
  return out;
}

}  // namespace iscc::sensing
