#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "iscc/common/geometry.hpp"

namespace iscc::network {

/// Swarm simulation world parameters. The defaults reproduce the discovery
/// experiment: a 600 x 600 x 300 m arena, 5..10 m/s random-waypoint motion
/// and a 156 m communication disk. The transmit power and SINR threshold are
/// carried along only to document where that disk radius comes from; the link
/// model itself is purely distance-based.
struct NetworkScenario {
  Vec3 arena{600.0, 600.0, 300.0};
  std::size_t node_count = 20;
  double speed_min_mps = 5.0;
  double speed_max_mps = 10.0;
  double comm_range_m = 156.0;
  double sinr_threshold_db = -14.0;
  double tx_power_w = 1.0;

  /// Sensing coverage for the sensing-triggered protocol. Crossings of the
  /// comm boundary can only be observed if the sensor sees past it, hence the
  /// default 1.2 x comm_range.
  double sensing_range_m = 187.2;
  double sensing_period_s = 0.05;
  double sensing_noise_std_m = 0.0;

  double tick_s = 0.01;
  double duration_s = 60.0;
  double beacon_airtime_s = 0.001;

  /// Boundary crossings trigger beacons only once the sensed distance clears
  /// the comm range by this margin, so a node hovering at 156 m does not
  /// generate beacon chatter.
  double hysteresis_m = 2.0;

  std::size_t ticks() const;

  /// Throws InvalidInput when a field is out of its documented domain.
  void validate() const;
};

/// Ground-truth neighbor sets: j is a neighbor of i iff their distance is
/// <= comm_range (boundary inclusive). Index i of the result is the set for
/// node i. Symmetric by construction.
std::vector<std::set<std::size_t>> true_neighbor_sets(
    const std::vector<Vec3>& positions, const NetworkScenario& scenario);

/// Jaccard index |reported n truth| / |reported u truth|. Two empty sets
/// agree vacuously and score 1.0.
double neighbor_accuracy(const std::set<std::size_t>& reported,
                         const std::set<std::size_t>& truth);

/// Recall |reported n truth| / |truth|, emitted alongside the Jaccard score
/// so over-reporting and under-reporting can be told apart. Empty truth
/// scores 1.0.
double neighbor_recall(const std::set<std::size_t>& reported,
                       const std::set<std::size_t>& truth);

}  // namespace iscc::network
