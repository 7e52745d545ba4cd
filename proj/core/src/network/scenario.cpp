#include "iscc/network/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "iscc/common/errors.hpp"

namespace iscc::network {

std::size_t NetworkScenario::ticks() const {
  return static_cast<std::size_t>(std::llround(duration_s / tick_s));
}

void NetworkScenario::validate() const {
  if (arena.x <= 0.0 || arena.y <= 0.0 || arena.z <= 0.0) {
    throw InvalidInput("arena dimensions must be positive");
  }
  if (node_count < 2) {
    throw InvalidInput("node_count must be at least 2");
  }
  if (speed_min_mps <= 0.0 || speed_max_mps < speed_min_mps) {
    throw InvalidInput("speed range must satisfy 0 < min <= max");
  }
  if (comm_range_m <= 0.0) {
    throw InvalidInput("comm_range_m must be positive");
  }
  if (sensing_range_m < comm_range_m) {
    throw InvalidInput(
        "sensing_range_m must cover the communication boundary "
        "(sensing_range_m >= comm_range_m)");
  }
  if (sensing_period_s <= 0.0) {
    throw InvalidInput("sensing_period_s must be positive");
  }
  if (sensing_noise_std_m < 0.0) {
    throw InvalidInput("sensing_noise_std_m must be non-negative");
  }
  if (tick_s <= 0.0) {
    throw InvalidInput("tick_s must be positive");
  }
  if (duration_s <= 0.0) {
    throw InvalidInput("duration_s must be positive");
  }
  if (beacon_airtime_s < 0.0) {
    throw InvalidInput("beacon_airtime_s must be non-negative");
  }
  if (hysteresis_m < 0.0) {
    throw InvalidInput("hysteresis_m must be non-negative");
  }
}

std::vector<std::set<std::size_t>> true_neighbor_sets(
    const std::vector<Vec3>& positions, const NetworkScenario& scenario) {
  const std::size_t n = positions.size();
  std::vector<std::set<std::size_t>> sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(positions[i], positions[j]) <= scenario.comm_range_m) {
        sets[i].insert(j);
        sets[j].insert(i);
      }
    }
  }
  return sets;
}

double neighbor_accuracy(const std::set<std::size_t>& reported,
                         const std::set<std::size_t>& truth) {
  if (reported.empty() && truth.empty()) return 1.0;
  std::vector<std::size_t> common;
  std::set_intersection(reported.begin(), reported.end(), truth.begin(),
                        truth.end(), std::back_inserter(common));
  const double inter = static_cast<double>(common.size());
  const double uni = static_cast<double>(reported.size() + truth.size()) - inter;
  return inter / uni;
}

double neighbor_recall(const std::set<std::size_t>& reported,
                       const std::set<std::size_t>& truth) {
  if (truth.empty()) return 1.0;
  std::vector<std::size_t> common;
  std::set_intersection(reported.begin(), reported.end(), truth.begin(),
                        truth.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(truth.size());
}

}  // namespace iscc::network
