#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iscc/network/routing.hpp"

namespace iscc::network {

/// The protocol roster the swarm-size sweep compares: the sensing-triggered
/// scheme against the beaconing baselines.
std::vector<ProtocolConfig> default_protocols();

struct NetworkExperimentConfig {
  /// Template scenario; node_count is overridden per sweep cell.
  NetworkScenario scenario;
  std::vector<std::size_t> node_counts{20, 40, 60, 80};
  std::vector<ProtocolConfig> protocols = default_protocols();
  std::size_t trials = 10;

  /// Topology events injected (and timed) per trial, alternating breaks and
  /// formations; the on-demand protocol gets breaks only.
  std::size_t update_events_per_trial = 5;
  double update_cap_s = 25.0;
  std::uint64_t seed = 1;
};

struct NetworkTrialRow {
  std::string protocol;
  std::size_t node_count = 0;
  std::size_t trial = 0;
  double mean_accuracy = 0.0;
  std::uint64_t beacons_sent = 0;

  /// Aggregates over the trial's valid update-time samples (injected and not
  /// censored); NaN when no event yielded one.
  double mean_update_time_s = 0.0;
  double p95_update_time_s = 0.0;
};

/// Full factorial sweep node_counts × protocols × trials. Per-cell seeds
/// derive from the experiment seed, node count and trial index only, so all
/// protocols in a (node_count, trial) cell see identical trajectories and
/// identical injected events: the comparison is paired.
std::vector<NetworkTrialRow> run_network_experiment(
    const NetworkExperimentConfig& config);

}  // namespace iscc::network
