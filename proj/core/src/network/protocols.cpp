#include "iscc/network/protocols.hpp"

#include <algorithm>
#include <cmath>

#include "iscc/common/csv.hpp"
#include "iscc/common/errors.hpp"

namespace iscc::network {

namespace {
constexpr std::uint64_t kDiscoveryTag = 0x4e455444;  // stream id for this sim
constexpr std::size_t kNoTarget = static_cast<std::size_t>(-1);
}  // namespace

ProtocolConfig ProtocolConfig::sensing_triggered() {
  ProtocolConfig config;
  config.variant = ProtocolVariant::SensingTriggered;
  return config;
}

ProtocolConfig ProtocolConfig::fixed_beacon(double interval_s) {
  ProtocolConfig config;
  config.variant = ProtocolVariant::FixedBeacon;
  config.interval_s = interval_s;
  return config;
}

ProtocolConfig ProtocolConfig::periodic_hello(double interval_s,
                                              bool flooding) {
  ProtocolConfig config;
  config.variant = ProtocolVariant::PeriodicHello;
  config.interval_s = interval_s;
  config.topology_flooding = flooding;
  return config;
}

ProtocolConfig ProtocolConfig::on_demand(double route_timeout_s) {
  ProtocolConfig config;
  config.variant = ProtocolVariant::OnDemandDiscovery;
  config.route_timeout_s = route_timeout_s;
  return config;
}

ProtocolConfig ProtocolConfig::adaptive_hello(double min_interval_s,
                                              double max_interval_s,
                                              double speed_scaling) {
  ProtocolConfig config;
  config.variant = ProtocolVariant::AdaptiveHello;
  config.min_interval_s = min_interval_s;
  config.max_interval_s = max_interval_s;
  config.speed_scaling = speed_scaling;
  return config;
}

double ProtocolConfig::effective_expiry() const {
  if (expiry_s > 0.0) return expiry_s;
  switch (variant) {
    case ProtocolVariant::FixedBeacon:
    case ProtocolVariant::PeriodicHello:
      return 3.0 * interval_s;
    case ProtocolVariant::AdaptiveHello:
      return 3.0 * max_interval_s;
    case ProtocolVariant::OnDemandDiscovery:
      // Entries exist only as a side effect of route traffic and age out
      // with the routes they came from.
      return route_timeout_s;
    default:
      return 0.0;  // no timer-based expiry
  }
}

double ProtocolConfig::hello_interval(double speed_mps) const {
  if (variant != ProtocolVariant::AdaptiveHello) return interval_s;
  const double scaled = std::min(1.0, speed_scaling * std::max(0.0, speed_mps));
  return max_interval_s - (max_interval_s - min_interval_s) * scaled;
}

bool ProtocolConfig::sends_hellos() const {
  return variant == ProtocolVariant::FixedBeacon ||
         variant == ProtocolVariant::PeriodicHello ||
         variant == ProtocolVariant::AdaptiveHello;
}

std::string ProtocolConfig::label() const {
  switch (variant) {
    case ProtocolVariant::SensingTriggered:
      return "sensing_triggered";
    case ProtocolVariant::FixedBeacon:
      return "fixed_beacon_" + CsvWriter::format(interval_s) + "s";
    case ProtocolVariant::PeriodicHello:
      return "periodic_hello_" + CsvWriter::format(interval_s) + "s" +
             (topology_flooding ? "_flood" : "_local");
    case ProtocolVariant::OnDemandDiscovery:
      return "on_demand_" + CsvWriter::format(route_timeout_s) + "s";
    case ProtocolVariant::AdaptiveHello:
      return "adaptive_hello_" + CsvWriter::format(min_interval_s) + "s_" +
             CsvWriter::format(max_interval_s) + "s";
  }
  return "unknown";
}

void ProtocolConfig::validate() const {
  if (variant == ProtocolVariant::FixedBeacon ||
      variant == ProtocolVariant::PeriodicHello) {
    if (interval_s <= 0.0) throw InvalidInput("hello interval must be positive");
  }
  if (variant == ProtocolVariant::AdaptiveHello) {
    if (min_interval_s <= 0.0 || max_interval_s <= 0.0) {
      throw InvalidInput("adaptive hello intervals must be positive");
    }
    if (min_interval_s > max_interval_s) {
      throw InvalidInput("adaptive hello requires min_interval <= max_interval");
    }
    if (speed_scaling < 0.0) {
      throw InvalidInput("speed_scaling must be non-negative");
    }
  }
  if (variant == ProtocolVariant::OnDemandDiscovery && route_timeout_s <= 0.0) {
    throw InvalidInput("route_timeout must be positive");
  }
  if (expiry_s < 0.0) throw InvalidInput("expiry must be non-negative");
}

DiscoverySimulation::DiscoverySimulation(const NetworkScenario& scenario,
                                         const ProtocolConfig& protocol,
                                         std::uint64_t seed)
    : scenario_(scenario),
      protocol_(protocol),
      mobility_rng_(derive_seed({seed, kDiscoveryTag, 0})),
      protocol_rng_(derive_seed({seed, kDiscoveryTag, 1})) {
  scenario_.validate();
  protocol_.validate();
  state_ = initial_swarm(scenario_, mobility_rng_);
  tables_.resize(scenario_.node_count);
  nodes_.resize(scenario_.node_count);
  membership_.resize(scenario_.node_count);
  for (std::size_t i = 0; i < scenario_.node_count; ++i) {
    tables_[i].owner = i;
    if (protocol_.sends_hellos()) {
      // Stagger transmissions: a shared phase would synchronize the whole
      // swarm and make hello-driven latency look quantized.
      nodes_[i].next_hello_s = protocol_rng_.uniform(
          0.0, protocol_.hello_interval(state_[i].speed_mps));
    }
  }
  scan_ticks_ = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(scenario_.sensing_period_s / scenario_.tick_s)));
}

void DiscoverySimulation::step() {
  if (mobility_enabled_) {
    step_random_waypoint(state_, scenario_, scenario_.tick_s, mobility_rng_);
  }
  deliver_pending();

  const bool scan_tick = tick_index_ % scan_ticks_ == 0;
  for (std::size_t i = 0; i < scenario_.node_count; ++i) {
    switch (protocol_.variant) {
      case ProtocolVariant::SensingTriggered:
        run_sensing_triggered(i, scan_tick);
        break;
      case ProtocolVariant::FixedBeacon:
      case ProtocolVariant::PeriodicHello:
      case ProtocolVariant::AdaptiveHello:
        run_periodic(i);
        break;
      case ProtocolVariant::OnDemandDiscovery:
        break;  // acquires neighbor knowledge only through route requests
    }
  }

  expire_entries();
  refresh_membership();
  if (hooks_ != nullptr) hooks_->on_tick(*this);

  in_flight_ = std::move(outbox_);
  outbox_.clear();
  ++tick_index_;
}

void DiscoverySimulation::send_beacon(std::size_t sender, BeaconKind kind,
                                      std::size_t target) {
  PendingBeacon pending;
  pending.beacon.sender = sender;
  pending.beacon.kind = kind;
  pending.beacon.target = target;
  pending.beacon.position = state_[sender].position;
  pending.beacon.velocity = state_[sender].velocity;
  pending.beacon.sent_at_s = now_s();
  const Vec3 from = state_[sender].position;
  for (const NodeKinematics& node : state_) {
    if (node.id == sender) continue;
    if (distance(from, node.position) <= scenario_.comm_range_m) {
      pending.recipients.push_back(node.id);
    }
  }
  ++beacons_sent_;
  outbox_.push_back(std::move(pending));
}

void DiscoverySimulation::deliver_pending() {
  for (const PendingBeacon& pending : in_flight_) {
    for (std::size_t receiver : pending.recipients) {
      ++beacons_received_;
      process_beacon(receiver, pending.beacon);
      if (hooks_ != nullptr) hooks_->on_beacon_received(receiver, pending.beacon);
    }
  }
  in_flight_.clear();
}

void DiscoverySimulation::process_beacon(std::size_t receiver,
                                         const Beacon& beacon) {
  if (beacon.kind == BeaconKind::Hello) {
    NeighborEntry& entry = tables_[receiver].entries[beacon.sender];
    entry.position = beacon.position;
    entry.velocity = beacon.velocity;
    entry.last_update_s = now_s();
    entry.source = EntrySource::Beacon;
    return;
  }

  // Pairwise handshake traffic: everyone in range hears it, only the peer
  // the crossing was detected against acts on it.
  if (beacon.target != receiver) return;

  if (beacon.kind == BeaconKind::Entry) {
    NeighborEntry& entry = tables_[receiver].entries[beacon.sender];
    entry.position = beacon.position;
    entry.velocity = beacon.velocity;
    entry.last_update_s = now_s();
    entry.source = EntrySource::Beacon;

    auto [it, created] = nodes_[receiver].tracks.try_emplace(beacon.sender);
    SensedTrack& track = it->second;
    if (created || beacon.sent_at_s > track.last_seen_s) {
      // The beacon states the sender's kinematics at send time. Adopt them
      // whenever they are fresher than our own scan of the sender; otherwise
      // a track left stale by an abrupt displacement answers the handshake
      // and immediately reads its own dead reckoning as an exit crossing.
      track.position = beacon.position;
      track.velocity = beacon.velocity;
      track.last_seen_s = beacon.sent_at_s;
    }
    if (!track.in_comm) {
      // The peer saw the crossing first; complete the handshake so it learns
      // our identity too. When both sides detected it simultaneously each
      // already sent its half and no reply is needed.
      track.in_comm = true;
      send_beacon(receiver, BeaconKind::Entry, beacon.sender);
    }
    return;
  }

  // Farewell. Usually undeliverable (the pair just left comm range), but can
  // arrive when the sender's distance estimate ran ahead of the truth.
  tables_[receiver].entries.erase(beacon.sender);
  auto it = nodes_[receiver].tracks.find(beacon.sender);
  if (it != nodes_[receiver].tracks.end()) it->second.in_comm = false;
}

void DiscoverySimulation::run_sensing_triggered(std::size_t node,
                                                bool scan_tick) {
  PerNode& pn = nodes_[node];
  if (scan_tick) {
    const std::vector<PeerObservation> observations = sense_peers(
        node, state_, scenario_, scenario_.sensing_noise_std_m, protocol_rng_);
    std::set<std::size_t> seen;
    for (const PeerObservation& obs : observations) {
      seen.insert(obs.track_key);
      SensedTrack& track = pn.tracks[obs.track_key];
      track.position = obs.position;
      track.velocity = obs.velocity;
      track.last_seen_s = now_s();
    }
    for (auto it = pn.tracks.begin(); it != pn.tracks.end();) {
      if (seen.count(it->first) == 0) {
        // Track lost beyond sensing range. If it was still bound the exit
        // event never fired (abrupt displacement); emit it now.
        if (it->second.in_comm) {
          send_beacon(node, BeaconKind::Farewell, it->first);
          tables_[node].entries.erase(it->first);
        }
        it = pn.tracks.erase(it);
      } else {
        ++it;
      }
    }
  } else {
    for (auto& [key, track] : pn.tracks) {
      track.position += track.velocity * scenario_.tick_s;
    }
  }

  const Vec3 own = state_[node].position;
  for (auto& [key, track] : pn.tracks) {
    const double d = distance(own, track.position);
    if (!track.in_comm && d <= scenario_.comm_range_m) {
      track.in_comm = true;
      send_beacon(node, BeaconKind::Entry, key);
    } else if (track.in_comm &&
               d > scenario_.comm_range_m + scenario_.hysteresis_m) {
      track.in_comm = false;
      send_beacon(node, BeaconKind::Farewell, key);
      tables_[node].entries.erase(key);
    }
    auto it = tables_[node].entries.find(key);
    if (it != tables_[node].entries.end()) {
      it->second.position = track.position;
      it->second.velocity = track.velocity;
      it->second.last_update_s = now_s();
      it->second.source = EntrySource::Sensing;
    }
  }
}

void DiscoverySimulation::run_periodic(std::size_t node) {
  PerNode& pn = nodes_[node];
  while (pn.next_hello_s <= now_s() + 1e-12) {
    send_beacon(node, BeaconKind::Hello, kNoTarget);
    pn.next_hello_s += protocol_.hello_interval(state_[node].speed_mps);
  }
}

void DiscoverySimulation::expire_entries() {
  const double expiry = protocol_.effective_expiry();
  if (expiry <= 0.0) return;
  for (NeighborTable& table : tables_) {
    for (auto it = table.entries.begin(); it != table.entries.end();) {
      if (now_s() - it->second.last_update_s > expiry) {
        it = table.entries.erase(it);
      } else {
        ++it;
      }
    }
  }
}

void DiscoverySimulation::refresh_membership() {
  for (std::size_t i = 0; i < scenario_.node_count; ++i) {
    std::set<std::size_t> current;
    if (protocol_.variant == ProtocolVariant::SensingTriggered) {
      const Vec3 own = state_[i].position;
      for (const auto& [peer, entry] : tables_[i].entries) {
        if (distance(own, entry.position) <= scenario_.comm_range_m) {
          current.insert(peer);
        }
      }
    } else {
      for (const auto& [peer, entry] : tables_[i].entries) {
        current.insert(peer);
      }
    }
    if (current != membership_[i]) {
      membership_[i] = std::move(current);
      if (hooks_ != nullptr) hooks_->on_membership_changed(i);
    }
  }
}

const std::set<std::size_t>& DiscoverySimulation::membership(
    std::size_t node) const {
  return membership_.at(node);
}

double DiscoverySimulation::mean_accuracy_now() const {
  const auto truth = true_neighbor_sets(positions_of(state_), scenario_);
  double sum = 0.0;
  for (std::size_t i = 0; i < scenario_.node_count; ++i) {
    sum += neighbor_accuracy(membership_[i], truth[i]);
  }
  return sum / static_cast<double>(scenario_.node_count);
}

double DiscoverySimulation::mean_recall_now() const {
  const auto truth = true_neighbor_sets(positions_of(state_), scenario_);
  double sum = 0.0;
  for (std::size_t i = 0; i < scenario_.node_count; ++i) {
    sum += neighbor_recall(membership_[i], truth[i]);
  }
  return sum / static_cast<double>(scenario_.node_count);
}

void DiscoverySimulation::set_mobility_enabled(bool enabled) {
  mobility_enabled_ = enabled;
  if (!enabled) {
    for (NodeKinematics& node : state_) {
      node.velocity = Vec3{};
    }
  } else {
    for (NodeKinematics& node : state_) {
      const Vec3 heading = node.waypoint - node.position;
      const double d = norm(heading);
      node.velocity = d > 0.0 ? heading * (node.speed_mps / d) : Vec3{};
    }
  }
}

void DiscoverySimulation::teleport(std::size_t node, const Vec3& position) {
  if (node >= state_.size()) throw InvalidInput("teleport target out of range");
  state_[node].position = position;
  state_[node].velocity = Vec3{};
  state_[node].waypoint = position;
}

DiscoveryResult run_discovery(const ProtocolConfig& protocol,
                              const NetworkScenario& scenario,
                              std::uint64_t seed) {
  DiscoverySimulation sim(scenario, protocol, seed);
  DiscoveryResult result;
  const std::size_t ticks = scenario.ticks();
  result.accuracy_series.reserve(ticks);
  double recall_sum = 0.0;
  for (std::size_t t = 0; t < ticks; ++t) {
    sim.step();
    const auto truth = true_neighbor_sets(positions_of(sim.state()), scenario);
    double acc = 0.0;
    double rec = 0.0;
    for (std::size_t i = 0; i < scenario.node_count; ++i) {
      acc += neighbor_accuracy(sim.membership(i), truth[i]);
      rec += neighbor_recall(sim.membership(i), truth[i]);
    }
    acc /= static_cast<double>(scenario.node_count);
    rec /= static_cast<double>(scenario.node_count);
    result.accuracy_series.push_back(acc);
    recall_sum += rec;
  }
  const double n_ticks = static_cast<double>(ticks);
  double acc_sum = 0.0;
  for (double a : result.accuracy_series) acc_sum += a;
  result.mean_accuracy = acc_sum / n_ticks;
  result.mean_recall = recall_sum / n_ticks;
  result.beacons_sent = sim.beacons_sent();
  return result;
}

}  // namespace iscc::network
