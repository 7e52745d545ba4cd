#include "iscc/network/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iscc/common/errors.hpp"
#include "iscc/common/rng.hpp"

namespace iscc::network {

namespace {

constexpr std::uint64_t kSweepTag = 0x4e455357;

double nearest_rank(std::vector<double> samples, double quantile) {
  std::sort(samples.begin(), samples.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(quantile * static_cast<double>(samples.size())));
  return samples[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace

std::vector<ProtocolConfig> default_protocols() {
  return {
      ProtocolConfig::sensing_triggered(),
      ProtocolConfig::fixed_beacon(0.25),
      ProtocolConfig::periodic_hello(2.0, true),
      ProtocolConfig::periodic_hello(2.0, false),
      ProtocolConfig::on_demand(3.0),
      ProtocolConfig::adaptive_hello(0.5, 3.0, 0.1),
  };
}

std::vector<NetworkTrialRow> run_network_experiment(
    const NetworkExperimentConfig& config) {
  if (config.node_counts.empty()) throw InvalidInput("node_counts empty");
  if (config.protocols.empty()) throw InvalidInput("protocols empty");
  if (config.trials == 0) throw InvalidInput("trials must be positive");

  std::vector<NetworkTrialRow> rows;
  rows.reserve(config.node_counts.size() * config.protocols.size() *
               config.trials);
  for (std::size_t count : config.node_counts) {
    NetworkScenario scenario = config.scenario;
    scenario.node_count = count;
    scenario.validate();
    for (const ProtocolConfig& protocol : config.protocols) {
      for (std::size_t trial = 0; trial < config.trials; ++trial) {
        const std::uint64_t cell_seed = derive_seed(
            {config.seed, kSweepTag, static_cast<std::uint64_t>(count),
             static_cast<std::uint64_t>(trial)});

        const DiscoveryResult discovery =
            run_discovery(protocol, scenario, cell_seed);

        // One update-time sample per injected event. Seeds that fail to
        // produce an injectable event are replaced from a bounded retry
        // budget; censored measurements stay excluded.
        std::vector<double> update_times;
        const std::size_t wanted = config.update_events_per_trial;
        const std::size_t max_attempts = 4 * wanted;
        std::size_t attempt = 0;
        while (update_times.size() < wanted && attempt < max_attempts) {
          const TopologyEvent event =
              (protocol.variant == ProtocolVariant::OnDemandDiscovery ||
               attempt % 2 == 0)
                  ? TopologyEvent::LinkBreak
                  : TopologyEvent::LinkFormation;
          const UpdateTimeMeasurement sample = measure_routing_update_time(
              protocol, scenario, event,
              derive_seed({cell_seed, static_cast<std::uint64_t>(attempt)}),
              config.update_cap_s);
          ++attempt;
          if (sample.event_injected && !sample.censored) {
            update_times.push_back(sample.update_time_s);
          }
        }

        NetworkTrialRow row;
        row.protocol = protocol.label();
        row.node_count = count;
        row.trial = trial;
        row.mean_accuracy = discovery.mean_accuracy;
        row.beacons_sent = discovery.beacons_sent;
        if (update_times.empty()) {
          row.mean_update_time_s = std::numeric_limits<double>::quiet_NaN();
          row.p95_update_time_s = std::numeric_limits<double>::quiet_NaN();
        } else {
          double sum = 0.0;
          for (double t : update_times) sum += t;
          row.mean_update_time_s =
              sum / static_cast<double>(update_times.size());
          row.p95_update_time_s = nearest_rank(update_times, 0.95);
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace iscc::network
