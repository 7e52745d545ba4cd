#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "iscc/network/protocols.hpp"

namespace iscc::network {

struct RouteEntry {
  std::size_t next_hop = 0;
  std::size_t hop_count = 0;

  friend bool operator==(const RouteEntry&, const RouteEntry&) = default;
};

struct RoutingTable {
  std::size_t owner = 0;
  std::map<std::size_t, RouteEntry> routes;
};

/// One node's picture of who links to whom: per origin the latest advertised
/// neighbor set. A link counts only when both endpoints list each other, so a
/// half-stale advertisement cannot fabricate a usable edge.
struct TopologyView {
  struct Row {
    std::uint64_t seq = 0;
    bool valid = false;
    std::set<std::size_t> neighbors;
  };
  std::vector<Row> rows;

  explicit TopologyView(std::size_t node_count = 0) : rows(node_count) {}
};

/// Undirected adjacency implied by a view (bidirectional confirmation).
std::vector<std::set<std::size_t>> view_links(const TopologyView& view);

/// Min-hop routes from owner over the given adjacency. Equal-hop ties resolve
/// to the smallest next-hop identifier. Unreachable destinations simply get
/// no entry.
RoutingTable bfs_routes(std::size_t owner,
                        const std::vector<std::set<std::size_t>>& adjacency);

/// Routing tables each node would compute from its own topology view.
std::vector<RoutingTable> recompute_routes(
    const std::vector<TopologyView>& views);

/// A protocol's routing machinery, driven tick by tick alongside discovery.
/// Control traffic propagates one hop per tick, matching beacon latency.
class RoutingLayer : public RoutingHooks {
public:
  /// Current table; recomputed lazily when the underlying knowledge changed.
  virtual const RoutingTable& routing_table(std::size_t node) = 0;
  virtual std::uint64_t control_messages_sent() const = 0;
  virtual bool traffic_in_flight() const = 0;
};

/// Routing scheme matching the discovery protocol: event-triggered link-state
/// for the sensing-triggered and beacon-maintenance protocols, periodic
/// flooded topology advertisements for PeriodicHello with flooding, hop-by-
/// hop distance vector piggybacked on hellos for PeriodicHello without, and
/// on-demand route discovery for OnDemandDiscovery.
std::unique_ptr<RoutingLayer> make_routing_layer(const ProtocolConfig& protocol,
                                                 const NetworkScenario& scenario,
                                                 std::uint64_t seed);

enum class TopologyEvent { LinkBreak, LinkFormation };

struct UpdateTimeMeasurement {
  double update_time_s = 0.0;

  /// Correction did not complete within the cap (e.g. the event partitioned
  /// the network): the sample must be excluded from aggregates.
  bool censored = false;

  /// False when no suitable event could be injected for this seed (no
  /// eligible pair, or the event would not affect any route).
  bool event_injected = false;

  std::size_t affected_nodes = 0;
};

/// Simulated time from a single injected topology change until every node
/// whose routing table is affected holds correct routes again.
///
/// The harness runs the swarm with mobility for a short warmup, freezes it,
/// waits for routing to quiesce, then teleports one node radially so the
/// chosen pair's link flips state. Injection candidates are filtered so the
/// event changes at least one routing table and does not partition the
/// network, then drawn uniformly. Convergence is checked against a breadth-
/// first-search oracle on the post-event true graph; for the on-demand
/// protocol, which only ever repairs its active flow, convergence means the
/// flow's route works again at oracle length. Formation events are not
/// measurable for the on-demand protocol (they never invalidate an active
/// route) and report event_injected = false.
///
/// An event whose injection would change no routing table completes in zero
/// time by definition. With uniform selection such events are filtered out;
/// `forced_pair` pins (anchor, mover) directly, bypassing the eligibility
/// and partition filters, so degenerate and partitioning events can be
/// exercised deliberately.
UpdateTimeMeasurement measure_routing_update_time(
    const ProtocolConfig& protocol, const NetworkScenario& scenario,
    TopologyEvent event, std::uint64_t seed, double cap_s = 25.0,
    std::optional<std::pair<std::size_t, std::size_t>> forced_pair =
        std::nullopt);

}  // namespace iscc::network
