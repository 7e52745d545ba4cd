#include "iscc/sensing/detection.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>

#include "iscc/common/errors.hpp"

namespace iscc::sensing {

DetectionResult detect_targets(const FrequencySnapshot& snapshot, double pfa,
                               std::size_t oversample) {
  if (!(pfa > 0.0 && pfa < 1.0)) {
    throw InvalidInput("pfa must lie strictly between 0 and 1");
  }
  if (oversample == 0) {
    throw InvalidInput("oversample factor must be positive");
  }

  const std::size_t nfft = snapshot.samples.size() * oversample;
  std::vector<std::complex<double>> padded(nfft, {0.0, 0.0});
  std::copy(snapshot.samples.begin(), snapshot.samples.end(), padded.begin());

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> time;
  fft.inv(time, padded);

  // fft.inv scales by 1/nfft; undo it so the statistic is
  // |sum x[n] e^{j 2 pi n k / nfft}|^2 / N_occ.
  const double n_occ = static_cast<double>(snapshot.mask.occupied_count());
  const double scale =
      static_cast<double>(nfft) * static_cast<double>(nfft) / n_occ;

  std::vector<double> stat(nfft);
  for (std::size_t k = 0; k < nfft; ++k) {
    stat[k] = std::norm(time[k]) * scale;
  }

  DetectionResult result;
  result.threshold = -snapshot.noise_power * std::log(pfa);

  const double bin_to_range = kSpeedOfLight / (2.0 * snapshot.config.spacing_hz *
                                               static_cast<double>(nfft));
  for (std::size_t k = 0; k < nfft; ++k) {
    const double prev = stat[(k + nfft - 1) % nfft];
    const double next = stat[(k + 1) % nfft];
    if (stat[k] > result.threshold && stat[k] > prev && stat[k] >= next) {
      result.detections.push_back({static_cast<double>(k) * bin_to_range,
                                   stat[k]});
    }
  }
  std::sort(result.detections.begin(), result.detections.end(),
            [](const Detection& a, const Detection& b) {
              return a.statistic > b.statistic;
            });
  return result;
}

}  // namespace iscc::sensing
