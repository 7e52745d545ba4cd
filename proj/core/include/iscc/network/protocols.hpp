#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "iscc/common/rng.hpp"
#include "iscc/network/mobility.hpp"
#include "iscc/network/scenario.hpp"

namespace iscc::network {

enum class BeaconKind {
  Hello,     // scheduled broadcast of the periodic protocols
  Entry,     // sensing-triggered handshake on a comm-boundary entry
  Farewell,  // sensing-triggered notice on a comm-boundary exit
};

struct Beacon {
  std::size_t sender = 0;
  BeaconKind kind = BeaconKind::Hello;

  /// Entry and Farewell are part of a pairwise handshake: broadcast like any
  /// beacon, but only the peer whose boundary crossing triggered them acts on
  /// the content. Unused for Hello.
  std::size_t target = 0;

  Vec3 position;
  Vec3 velocity;
  double sent_at_s = 0.0;
};

enum class EntrySource { Beacon, Sensing };

struct NeighborEntry {
  Vec3 position;
  Vec3 velocity;
  double last_update_s = 0.0;
  EntrySource source = EntrySource::Beacon;
};

struct NeighborTable {
  std::size_t owner = 0;
  std::map<std::size_t, NeighborEntry> entries;
};

enum class ProtocolVariant {
  SensingTriggered,
  FixedBeacon,
  PeriodicHello,
  OnDemandDiscovery,
  AdaptiveHello,
};

struct ProtocolConfig {
  ProtocolVariant variant = ProtocolVariant::SensingTriggered;

  /// Hello period for FixedBeacon and PeriodicHello.
  double interval_s = 0.25;

  /// PeriodicHello only: flood topology advertisements (link-state) or keep
  /// route knowledge spreading hop by hop through the hellos themselves
  /// (distance vector).
  bool topology_flooding = true;

  /// OnDemandDiscovery only.
  double route_timeout_s = 3.0;

  /// AdaptiveHello only: the hello period shrinks linearly from max_interval
  /// at standstill down to min_interval once speed reaches
  /// 1 / speed_scaling.
  double min_interval_s = 0.5;
  double max_interval_s = 3.0;
  double speed_scaling = 0.1;

  /// Neighbor entries without a refreshing beacon drop out after this long.
  /// Zero selects the default of 3x the (largest) hello interval. Sensing-
  /// triggered entries never expire; sensing itself refreshes them.
  double expiry_s = 0.0;

  static ProtocolConfig sensing_triggered();
  static ProtocolConfig fixed_beacon(double interval_s);
  static ProtocolConfig periodic_hello(double interval_s, bool flooding);
  static ProtocolConfig on_demand(double route_timeout_s);
  static ProtocolConfig adaptive_hello(double min_interval_s,
                                       double max_interval_s,
                                       double speed_scaling);

  double effective_expiry() const;
  double hello_interval(double speed_mps) const;
  bool sends_hellos() const;
  std::string label() const;
  void validate() const;
};

class DiscoverySimulation;

/// Observation points the routing layer plugs into. The discovery layer owns
/// time, mobility and beacon delivery; routing rides along per tick.
class RoutingHooks {
public:
  virtual ~RoutingHooks() = default;
  virtual void on_beacon_received(std::size_t receiver, const Beacon& beacon) = 0;
  virtual void on_membership_changed(std::size_t node) = 0;
  virtual void on_tick(DiscoverySimulation& sim) = 0;
};

/// Tick-synchronous swarm world running one discovery protocol. Beacons
/// enqueued during a tick reach every node inside comm_range of the sender
/// one tick later (the 1 ms airtime fits inside the 10 ms tick). All protocol
/// state lives per node; nothing reads another node's private state except
/// through delivered beacons and sensing observations.
class DiscoverySimulation {
public:
  DiscoverySimulation(const NetworkScenario& scenario,
                      const ProtocolConfig& protocol, std::uint64_t seed);

  void step();

  double now_s() const { return static_cast<double>(tick_index_) * scenario_.tick_s; }
  std::size_t tick_index() const { return tick_index_; }
  const NetworkScenario& scenario() const { return scenario_; }
  const ProtocolConfig& protocol() const { return protocol_; }
  const std::vector<NodeKinematics>& state() const { return state_; }
  const std::vector<NeighborTable>& tables() const { return tables_; }

  /// The neighbor set the node would act on right now. Periodic protocols
  /// report their unexpired table entries. The sensing-triggered protocol
  /// reports bound entries whose live sensed position is within comm_range,
  /// so its membership follows the exact boundary even though beacon events
  /// are hysteresis-gated.
  const std::set<std::size_t>& membership(std::size_t node) const;

  std::uint64_t beacons_sent() const { return beacons_sent_; }
  std::uint64_t beacons_received() const { return beacons_received_; }

  double mean_accuracy_now() const;
  double mean_recall_now() const;

  void attach_routing(RoutingHooks* hooks) { hooks_ = hooks; }

  /// Measurement controls. Freezing mobility also zeroes velocities so the
  /// swarm hovers in place instead of dead-reckoning away from reality.
  void set_mobility_enabled(bool enabled);
  void teleport(std::size_t node, const Vec3& position);

  /// Beacon-sourced table writes for protocol layers that learn neighbors
  /// through their own control traffic (on-demand route requests).
  NeighborTable& table_for_update(std::size_t node) { return tables_.at(node); }

private:
  struct SensedTrack {
    Vec3 position;
    Vec3 velocity;
    double last_seen_s = 0.0;
    bool in_comm = false;  // hysteresis state machine for beacon triggering
  };

  struct PerNode {
    std::map<std::size_t, SensedTrack> tracks;  // SensingTriggered
    double next_hello_s = 0.0;                  // periodic protocols
  };

  void send_beacon(std::size_t sender, BeaconKind kind, std::size_t target);
  void deliver_pending();
  void process_beacon(std::size_t receiver, const Beacon& beacon);
  void run_sensing_triggered(std::size_t node, bool scan_tick);
  void run_periodic(std::size_t node);
  void expire_entries();
  void refresh_membership();

  NetworkScenario scenario_;
  ProtocolConfig protocol_;
  // Separate draw streams keep trajectories identical across protocols for a
  // given seed even though each protocol consumes a different number of
  // phase/noise draws.
  Rng mobility_rng_;
  Rng protocol_rng_;
  std::vector<NodeKinematics> state_;
  std::vector<NeighborTable> tables_;
  std::vector<PerNode> nodes_;
  std::vector<std::set<std::size_t>> membership_;

  struct PendingBeacon {
    Beacon beacon;
    std::vector<std::size_t> recipients;
  };
  std::vector<PendingBeacon> in_flight_;   // delivered on the next step
  std::vector<PendingBeacon> outbox_;      // enqueued during this step

  RoutingHooks* hooks_ = nullptr;
  std::size_t tick_index_ = 0;
  std::size_t scan_ticks_ = 1;
  bool mobility_enabled_ = true;
  std::uint64_t beacons_sent_ = 0;
  std::uint64_t beacons_received_ = 0;
};

struct DiscoveryResult {
  double mean_accuracy = 0.0;
  double mean_recall = 0.0;
  std::uint64_t beacons_sent = 0;
  std::vector<double> accuracy_series;  // per-tick mean Jaccard over nodes
};

/// Runs the protocol for scenario.duration_s, sampling the mean Jaccard
/// accuracy every tick and time-averaging over the run.
DiscoveryResult run_discovery(const ProtocolConfig& protocol,
                              const NetworkScenario& scenario,
                              std::uint64_t seed);

}  // namespace iscc::network
