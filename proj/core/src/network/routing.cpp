#include "iscc/network/routing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "iscc/common/errors.hpp"

namespace iscc::network {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::uint64_t kRoutingTag = 0x4e455452;
constexpr std::uint64_t kEventTag = 0x4e455645;

std::vector<std::size_t> in_range_of(const DiscoverySimulation& sim,
                                     std::size_t sender) {
  std::vector<std::size_t> recipients;
  const auto& state = sim.state();
  const Vec3 from = state[sender].position;
  for (const NodeKinematics& node : state) {
    if (node.id == sender) continue;
    if (distance(from, node.position) <= sim.scenario().comm_range_m) {
      recipients.push_back(node.id);
    }
  }
  return recipients;
}

}  // namespace

std::vector<std::set<std::size_t>> view_links(const TopologyView& view) {
  const std::size_t n = view.rows.size();
  std::vector<std::set<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!view.rows[i].valid) continue;
    for (std::size_t j : view.rows[i].neighbors) {
      if (j >= n || j == i) continue;
      if (view.rows[j].valid && view.rows[j].neighbors.count(i) > 0) {
        adjacency[i].insert(j);
      }
    }
  }
  return adjacency;
}

RoutingTable bfs_routes(std::size_t owner,
                        const std::vector<std::set<std::size_t>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (owner >= n) throw InvalidInput("bfs_routes owner out of range");
  std::vector<std::size_t> dist(n, kNone);
  std::vector<std::size_t> order;
  order.reserve(n);
  dist[owner] = 0;
  std::deque<std::size_t> queue{owner};
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (std::size_t v : adjacency[u]) {
      if (dist[v] == kNone) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }

  // Nodes come out of the queue in non-decreasing distance, so by the time a
  // node is processed every predecessor's next hop is final. The route keeps
  // the smallest next-hop identifier among all min-hop paths.
  std::vector<std::size_t> next_hop(n, kNone);
  RoutingTable table;
  table.owner = owner;
  for (std::size_t v : order) {
    if (v == owner) continue;
    std::size_t best = kNone;
    for (std::size_t u : adjacency[v]) {
      if (dist[u] != dist[v] - 1) continue;
      const std::size_t candidate = dist[u] == 0 ? v : next_hop[u];
      best = std::min(best, candidate);
    }
    next_hop[v] = best;
    table.routes[v] = RouteEntry{best, dist[v]};
  }
  return table;
}

std::vector<RoutingTable> recompute_routes(
    const std::vector<TopologyView>& views) {
  std::vector<RoutingTable> tables;
  tables.reserve(views.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    tables.push_back(bfs_routes(i, view_links(views[i])));
  }
  return tables;
}

namespace {

/// Link-state routing. Every node owns a TopologyView; advertisements flood
/// one hop per tick with per-origin sequence numbers deduplicating the storm.
/// EventTriggered originates on membership change (sensing-triggered and
/// beacon-maintenance protocols); Periodic originates on a fixed stagger
/// (hello protocols with topology flooding).
class LinkStateRouting final : public RoutingLayer {
public:
  enum class Mode { EventTriggered, Periodic };

  LinkStateRouting(Mode mode, double period_s, std::size_t node_count,
                   std::uint64_t seed)
      : mode_(mode), period_s_(period_s), n_(node_count) {
    views_.assign(n_, TopologyView(n_));
    tables_.resize(n_);
    dirty_.assign(n_, true);
    seq_.assign(n_, 0);
    changed_.assign(n_, false);
    for (std::size_t i = 0; i < n_; ++i) tables_[i].owner = i;
    if (mode_ == Mode::Periodic) {
      Rng rng(derive_seed({seed, kRoutingTag}));
      next_advert_.resize(n_);
      for (double& t : next_advert_) t = rng.uniform(0.0, period_s_);
    }
  }

  void on_beacon_received(std::size_t, const Beacon&) override {}

  void on_membership_changed(std::size_t node) override {
    changed_[node] = true;
  }

  void on_tick(DiscoverySimulation& sim) override {
    for (const Advert& advert : in_flight_) {
      for (std::size_t r : advert.recipients) {
        if (accept(r, advert.origin, advert.seq, advert.neighbors)) {
          forward(sim, r, advert);
        }
      }
    }
    in_flight_.clear();
    for (const ViewSync& sync : syncs_in_flight_) {
      // Database exchange: the receiver adopts every row newer than its own
      // and refloods those, so knowledge separated components accumulated
      // spreads after a merge.
      for (std::size_t origin = 0; origin < n_; ++origin) {
        if (origin == sync.to) continue;
        const TopologyView::Row& row = sync.rows.rows[origin];
        if (!row.valid) continue;
        if (accept(sync.to, origin, row.seq, row.neighbors)) {
          Advert advert;
          advert.origin = origin;
          advert.seq = row.seq;
          advert.neighbors = row.neighbors;
          advert.recipients = in_range_of(sim, sync.to);
          ++sent_;
          outbox_.push_back(std::move(advert));
        }
      }
    }
    syncs_in_flight_.clear();

    for (std::size_t i = 0; i < n_; ++i) {
      TopologyView::Row& own = views_[i].rows[i];
      const std::set<std::size_t>& membership = sim.membership(i);
      if (!own.valid || own.neighbors != membership) {
        // A fresh neighbor has no way to know what this side of the swarm
        // learned while they were apart; hand it the whole view.
        for (std::size_t j : membership) {
          if (own.neighbors.count(j) == 0) {
            syncs_outbox_.push_back(ViewSync{j, views_[i]});
            ++sent_;
          }
        }
        own.valid = true;
        own.neighbors = membership;
        dirty_[i] = true;
      }
      if (mode_ == Mode::EventTriggered) {
        if (changed_[i]) {
          changed_[i] = false;
          originate(sim, i);
        }
      } else if (sim.now_s() + 1e-12 >= next_advert_[i]) {
        originate(sim, i);
        next_advert_[i] += period_s_;
      }
    }

    in_flight_ = std::move(outbox_);
    outbox_.clear();
    syncs_in_flight_ = std::move(syncs_outbox_);
    syncs_outbox_.clear();
  }

  const RoutingTable& routing_table(std::size_t node) override {
    if (dirty_[node]) {
      tables_[node] = bfs_routes(node, view_links(views_[node]));
      dirty_[node] = false;
    }
    return tables_[node];
  }

  std::uint64_t control_messages_sent() const override { return sent_; }

  bool traffic_in_flight() const override {
    return !in_flight_.empty() || !outbox_.empty() ||
           !syncs_in_flight_.empty() || !syncs_outbox_.empty();
  }

private:
  struct Advert {
    std::size_t origin = 0;
    std::uint64_t seq = 0;
    std::set<std::size_t> neighbors;
    std::vector<std::size_t> recipients;
  };
  struct ViewSync {
    std::size_t to = 0;
    TopologyView rows;
  };

  bool accept(std::size_t node, std::size_t origin, std::uint64_t seq,
              const std::set<std::size_t>& neighbors) {
    TopologyView::Row& row = views_[node].rows[origin];
    if (row.valid && seq <= row.seq) return false;
    row.seq = seq;
    row.valid = true;
    row.neighbors = neighbors;
    dirty_[node] = true;
    return true;
  }

  void originate(DiscoverySimulation& sim, std::size_t node) {
    ++seq_[node];
    views_[node].rows[node].seq = seq_[node];
    Advert advert;
    advert.origin = node;
    advert.seq = seq_[node];
    advert.neighbors = views_[node].rows[node].neighbors;
    advert.recipients = in_range_of(sim, node);
    ++sent_;
    outbox_.push_back(std::move(advert));
  }

  void forward(DiscoverySimulation& sim, std::size_t relay,
               const Advert& advert) {
    Advert copy;
    copy.origin = advert.origin;
    copy.seq = advert.seq;
    copy.neighbors = advert.neighbors;
    copy.recipients = in_range_of(sim, relay);
    ++sent_;
    outbox_.push_back(std::move(copy));
  }

  Mode mode_;
  double period_s_;
  std::size_t n_;
  std::vector<TopologyView> views_;
  std::vector<RoutingTable> tables_;
  std::vector<bool> dirty_;
  std::vector<std::uint64_t> seq_;
  std::vector<bool> changed_;
  std::vector<double> next_advert_;
  std::vector<Advert> in_flight_;
  std::vector<Advert> outbox_;
  std::vector<ViewSync> syncs_in_flight_;
  std::vector<ViewSync> syncs_outbox_;
  std::uint64_t sent_ = 0;
};

/// Distance-vector routing for PeriodicHello without topology flooding.
/// Route knowledge spreads hop by hop through the hellos themselves: each
/// hello implicitly carries the sender's current vector (read directly from
/// the sender's state at delivery, one tick fresher than a wire snapshot
/// would be). Destination sequence numbers, derived from the hello send
/// tick, order freshness; a node that loses its next hop poisons the routes
/// through it with an odd sequence number, and only a fresher advertisement
/// from the destination itself can resurrect them. Among equally fresh
/// finite routes only strict improvements are adopted (fewer hops, then
/// smaller next-hop identifier), so a settled network never churns.
class DistanceVectorRouting final : public RoutingLayer {
public:
  DistanceVectorRouting(std::size_t node_count, double hold_s, double tick_s)
      : n_(node_count), hold_s_(hold_s), tick_s_(tick_s) {
    routes_.resize(n_);
    seq_floor_.resize(n_);
    tables_.resize(n_);
    dirty_.assign(n_, true);
    for (std::size_t i = 0; i < n_; ++i) tables_[i].owner = i;
  }

  void on_beacon_received(std::size_t receiver, const Beacon& beacon) override {
    if (beacon.kind != BeaconKind::Hello) return;
    const std::size_t sender = beacon.sender;
    const double stamp = beacon.sent_at_s;
    // Even, strictly increasing across the sender's hellos; every receiver
    // of one broadcast derives the same value.
    const std::uint64_t sender_seq =
        2 * static_cast<std::uint64_t>(std::llround(stamp / tick_s_));
    relax(receiver, sender, sender, 0, sender_seq, stamp);
    for (const auto& [dest, route] : routes_[sender]) {
      if (dest == receiver) continue;
      relax(receiver, sender, dest, route.hops, route.seq, stamp);
    }
  }

  void on_membership_changed(std::size_t) override {}

  void on_tick(DiscoverySimulation& sim) override {
    const double now = sim.now_s();
    for (std::size_t i = 0; i < n_; ++i) {
      const std::set<std::size_t>& membership = sim.membership(i);
      for (auto it = routes_[i].begin(); it != routes_[i].end();) {
        DvRoute& route = it->second;
        if (route.hops != kInfHops && membership.count(route.next_hop) == 0) {
          // Link layer lost the next hop: poison everything routed through
          // it. An odd sequence number marks the break as news that only
          // the destination itself can supersede.
          route.hops = kInfHops;
          route.seq += 1;
          route.refreshed = now;
          dirty_[i] = true;
        }
        if (now - route.refreshed > hold_s_) {
          // Remember how fresh the route was when it died so late echoes of
          // the same news cannot resurrect it.
          std::uint64_t& floor = seq_floor_[i][it->first];
          floor = std::max(floor, route.seq + (route.hops == kInfHops ? 0 : 1));
          it = routes_[i].erase(it);
          dirty_[i] = true;
        } else {
          ++it;
        }
      }
    }
  }

  const RoutingTable& routing_table(std::size_t node) override {
    if (dirty_[node]) {
      tables_[node].routes.clear();
      for (const auto& [dest, route] : routes_[node]) {
        if (route.hops == kInfHops) continue;
        tables_[node].routes[dest] = RouteEntry{route.next_hop, route.hops};
      }
      dirty_[node] = false;
    }
    return tables_[node];
  }

  std::uint64_t control_messages_sent() const override { return 0; }
  bool traffic_in_flight() const override { return false; }

private:
  static constexpr std::size_t kInfHops =
      std::numeric_limits<std::size_t>::max();

  struct DvRoute {
    std::size_t next_hop = 0;
    std::size_t hops = 0;
    std::uint64_t seq = 0;
    double refreshed = 0.0;
  };

  void relax(std::size_t node, std::size_t via, std::size_t dest,
             std::size_t via_hops, std::uint64_t seq, double stamp) {
    if (dest == node) return;
    const bool broken = via_hops == kInfHops;
    const std::size_t hops = broken ? kInfHops : via_hops + 1;
    if (!broken && hops > n_) return;
    auto it = routes_[node].find(dest);
    if (it == routes_[node].end()) {
      if (broken) return;  // no point learning about a dead route
      auto floor = seq_floor_[node].find(dest);
      if (floor != seq_floor_[node].end() && seq <= floor->second) return;
      routes_[node][dest] = DvRoute{via, hops, seq, stamp};
      dirty_[node] = true;
      return;
    }
    DvRoute& current = it->second;
    bool adopt = false;
    if (current.next_hop == via) {
      // The node this route actually goes through is authoritative for it,
      // including bad news.
      adopt = true;
    } else if (broken) {
      adopt = false;  // breaks travel only along the paths that used them
    } else if (current.hops == kInfHops) {
      adopt = seq > current.seq;  // repairs must be fresher than the break
    } else {
      adopt = hops < current.hops ||
              (hops == current.hops && via < current.next_hop);
    }
    if (adopt) {
      // The hold timer restarts only on genuinely fresher news. A cycle of
      // nodes vouching for each other merely recirculates the destination's
      // last sequence number, so such ghosts age out within one hold period
      // instead of surviving on mutual refreshment.
      const double refreshed =
          seq > current.seq ? stamp : current.refreshed;
      current = DvRoute{via, hops, seq, refreshed};
      dirty_[node] = true;
    }
  }

  std::size_t n_;
  double hold_s_;
  double tick_s_;
  std::vector<std::map<std::size_t, DvRoute>> routes_;
  std::vector<std::map<std::size_t, std::uint64_t>> seq_floor_;
  std::vector<RoutingTable> tables_;
  std::vector<bool> dirty_;
};

/// On-demand routing. No background traffic: the active flow sends one probe
/// packet per tick; a missing or broken next hop triggers a route-error walk
/// back to the source, which refloods a route request. Request floods move
/// one hop per tick, replies and errors unicast one hop per tick, and every
/// control packet teaches the receiver that the forwarder is a neighbor
/// (neighbor knowledge as a side effect of route requests).
class OnDemandRouting final : public RoutingLayer {
public:
  OnDemandRouting(std::size_t node_count, double route_timeout_s)
      : n_(node_count), timeout_s_(route_timeout_s) {
    routes_.resize(n_);
    tables_.resize(n_);
    dirty_.assign(n_, true);
    seen_.resize(n_);
    own_seq_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) tables_[i].owner = i;
  }

  void set_flow(std::size_t src, std::size_t dst) {
    flow_src_ = src;
    flow_dst_ = dst;
    flow_fresh_ = true;
  }

  void on_beacon_received(std::size_t, const Beacon&) override {}
  void on_membership_changed(std::size_t) override {}

  void on_tick(DiscoverySimulation& sim) override {
    const double now = sim.now_s();
    deliver_requests(sim, now);
    deliver_replies(sim, now);
    deliver_errors(sim);
    advance_probes(sim, now);

    if (flow_src_ != kNone) {
      probes_.push_back(Probe{flow_src_, {flow_src_}});
      auto route = routes_[flow_src_].find(flow_dst_);
      if (route == routes_[flow_src_].end() && now + 1e-12 >= next_rreq_s_) {
        flood_request(sim, now);
      }
    }

    for (std::size_t i = 0; i < n_; ++i) {
      for (auto it = routes_[i].begin(); it != routes_[i].end();) {
        if (now - it->second.refreshed > timeout_s_) {
          it = routes_[i].erase(it);
          dirty_[i] = true;
        } else {
          ++it;
        }
      }
    }

    pending_requests_ = std::move(request_outbox_);
    request_outbox_.clear();
    pending_replies_ = std::move(reply_outbox_);
    reply_outbox_.clear();
    pending_errors_ = std::move(error_outbox_);
    error_outbox_.clear();
  }

  const RoutingTable& routing_table(std::size_t node) override {
    if (dirty_[node]) {
      tables_[node].routes.clear();
      for (const auto& [dest, route] : routes_[node]) {
        tables_[node].routes[dest] = RouteEntry{route.next_hop, route.hops};
      }
      dirty_[node] = false;
    }
    return tables_[node];
  }

  std::uint64_t control_messages_sent() const override { return sent_; }

  bool traffic_in_flight() const override {
    return !pending_requests_.empty() || !request_outbox_.empty() ||
           !pending_replies_.empty() || !reply_outbox_.empty() ||
           !pending_errors_.empty() || !error_outbox_.empty();
  }

  double last_delivery_s() const { return last_delivery_s_; }

private:
  struct OdRoute {
    std::size_t next_hop = 0;
    std::size_t hops = 0;
    std::uint64_t seq = 0;
    double refreshed = 0.0;
  };
  struct Request {
    std::size_t origin = 0;
    std::uint64_t id = 0;
    std::size_t dest = 0;
    std::size_t hops = 0;  // from origin to the forwarder
    std::size_t forwarder = 0;
    Vec3 forwarder_position;
    Vec3 forwarder_velocity;
    std::vector<std::size_t> recipients;
  };
  struct Reply {
    std::size_t flow_dest = 0;
    std::size_t origin = 0;
    std::uint64_t dest_seq = 0;
    std::size_t hops = 0;  // from the flow destination to the forwarder
    std::size_t from = 0;
    std::size_t to = 0;
    Vec3 from_position;
    Vec3 from_velocity;
  };
  struct Error {
    std::size_t flow_dest = 0;
    std::size_t origin = 0;
    std::size_t from = 0;
    std::size_t to = 0;
  };
  struct Probe {
    std::size_t at = 0;
    std::vector<std::size_t> path;
  };

  void learn_neighbor(DiscoverySimulation& sim, std::size_t node,
                      std::size_t peer, const Vec3& position,
                      const Vec3& velocity, double now) {
    NeighborEntry& entry = sim.table_for_update(node).entries[peer];
    entry.position = position;
    entry.velocity = velocity;
    entry.last_update_s = now;
    entry.source = EntrySource::Beacon;
  }

  void flood_request(DiscoverySimulation& sim, double now) {
    ++rreq_id_;
    next_rreq_s_ = now + kRreqRateLimit;
    seen_[flow_src_][flow_src_] = rreq_id_;
    Request request;
    request.origin = flow_src_;
    request.id = rreq_id_;
    request.dest = flow_dst_;
    request.hops = 0;
    request.forwarder = flow_src_;
    request.forwarder_position = sim.state()[flow_src_].position;
    request.forwarder_velocity = sim.state()[flow_src_].velocity;
    request.recipients = in_range_of(sim, flow_src_);
    ++sent_;
    request_outbox_.push_back(std::move(request));
  }

  void deliver_requests(DiscoverySimulation& sim, double now) {
    for (const Request& request : pending_requests_) {
      for (std::size_t r : request.recipients) {
        auto seen = seen_[r].find(request.origin);
        if (seen != seen_[r].end() && seen->second >= request.id) continue;
        seen_[r][request.origin] = request.id;
        learn_neighbor(sim, r, request.forwarder, request.forwarder_position,
                       request.forwarder_velocity, now);
        install(r, request.origin, request.forwarder, request.hops + 1,
                request.id, now);
        if (r == request.dest) {
          Reply reply;
          reply.flow_dest = r;
          reply.origin = request.origin;
          reply.dest_seq = ++own_seq_[r];
          reply.hops = 0;
          reply.from = r;
          reply.to = request.forwarder;
          reply.from_position = sim.state()[r].position;
          reply.from_velocity = sim.state()[r].velocity;
          ++sent_;
          reply_outbox_.push_back(reply);
        } else {
          Request copy = request;
          copy.hops = request.hops + 1;
          copy.forwarder = r;
          copy.forwarder_position = sim.state()[r].position;
          copy.forwarder_velocity = sim.state()[r].velocity;
          copy.recipients = in_range_of(sim, r);
          ++sent_;
          request_outbox_.push_back(std::move(copy));
        }
      }
    }
    pending_requests_.clear();
  }

  void deliver_replies(DiscoverySimulation& sim, double now) {
    for (const Reply& reply : pending_replies_) {
      const std::size_t r = reply.to;
      if (distance(sim.state()[reply.from].position,
                   sim.state()[r].position) > sim.scenario().comm_range_m) {
        continue;  // unicast hop failed; the source retries on its timer
      }
      learn_neighbor(sim, r, reply.from, reply.from_position,
                     reply.from_velocity, now);
      install(r, reply.flow_dest, reply.from, reply.hops + 1, reply.dest_seq,
              now);
      if (r == reply.origin) continue;
      auto back = routes_[r].find(reply.origin);
      if (back == routes_[r].end()) continue;  // reverse route expired
      Reply copy;
      copy.flow_dest = reply.flow_dest;
      copy.origin = reply.origin;
      copy.dest_seq = reply.dest_seq;
      copy.hops = reply.hops + 1;
      copy.from = r;
      copy.to = back->second.next_hop;
      copy.from_position = sim.state()[r].position;
      copy.from_velocity = sim.state()[r].velocity;
      ++sent_;
      reply_outbox_.push_back(copy);
    }
    pending_replies_.clear();
  }

  void deliver_errors(DiscoverySimulation& sim) {
    for (const Error& error : pending_errors_) {
      const std::size_t r = error.to;
      if (distance(sim.state()[error.from].position,
                   sim.state()[r].position) > sim.scenario().comm_range_m) {
        continue;
      }
      auto route = routes_[r].find(error.flow_dest);
      if (route != routes_[r].end() && route->second.next_hop == error.from) {
        routes_[r].erase(route);
        dirty_[r] = true;
      }
      if (r != error.origin) forward_error(r, error);
    }
    pending_errors_.clear();
  }

  void forward_error(std::size_t from, const Error& error) {
    auto back = routes_[from].find(error.origin);
    if (back == routes_[from].end()) return;
    Error copy;
    copy.flow_dest = error.flow_dest;
    copy.origin = error.origin;
    copy.from = from;
    copy.to = back->second.next_hop;
    ++sent_;
    error_outbox_.push_back(copy);
  }

  void advance_probes(DiscoverySimulation& sim, double now) {
    if (flow_fresh_) {
      // A flow that has never delivered is not a blackhole yet.
      last_delivery_s_ = now;
      flow_fresh_ = false;
    }
    std::vector<Probe> alive;
    for (Probe& probe : probes_) {
      const std::size_t u = probe.at;
      if (u == flow_dst_) {
        last_delivery_s_ = now;
        continue;
      }
      if (probe.path.size() > n_) continue;  // routing loop; drop
      auto route = routes_[u].find(flow_dst_);
      if (route == routes_[u].end()) {
        report_break(sim, u, now);
        continue;
      }
      const std::size_t v = route->second.next_hop;
      if (distance(sim.state()[u].position, sim.state()[v].position) >
          sim.scenario().comm_range_m) {
        // Link-layer failure: drop every route using that hop, tell the
        // source.
        for (auto it = routes_[u].begin(); it != routes_[u].end();) {
          if (it->second.next_hop == v) {
            it = routes_[u].erase(it);
            dirty_[u] = true;
          } else {
            ++it;
          }
        }
        report_break(sim, u, now);
        continue;
      }
      route->second.refreshed = now;
      probe.at = v;
      probe.path.push_back(v);
      alive.push_back(std::move(probe));
    }
    probes_ = std::move(alive);

    // Silent blackhole guard: no delivery for a while means the repair
    // signalling itself got lost; force a fresh discovery.
    if (flow_src_ != kNone && now - last_delivery_s_ > kBlackholeSilence &&
        now + 1e-12 >= next_rreq_s_) {
      routes_[flow_src_].erase(flow_dst_);
      dirty_[flow_src_] = true;
      flood_request(sim, now);
    }
  }

  void report_break(DiscoverySimulation& sim, std::size_t at, double now) {
    if (at == flow_src_) {
      routes_[flow_src_].erase(flow_dst_);
      dirty_[flow_src_] = true;
      if (now + 1e-12 >= next_rreq_s_) flood_request(sim, now);
      return;
    }
    Error error;
    error.flow_dest = flow_dst_;
    error.origin = flow_src_;
    error.from = at;
    error.to = kNone;
    auto back = routes_[at].find(flow_src_);
    if (back == routes_[at].end()) return;
    error.to = back->second.next_hop;
    ++sent_;
    error_outbox_.push_back(error);
  }

  void install(std::size_t node, std::size_t dest, std::size_t via,
               std::size_t hops, std::uint64_t seq, double now) {
    if (dest == node) return;
    auto it = routes_[node].find(dest);
    bool adopt = false;
    if (it == routes_[node].end()) {
      adopt = true;
    } else if (seq > it->second.seq) {
      // Fresher knowledge of the destination wins even when the new path is
      // longer; this is what lets a repair displace a stale route instead of
      // waiting for it to expire.
      adopt = true;
    } else if (seq == it->second.seq) {
      adopt = it->second.next_hop == via || hops < it->second.hops ||
              (hops == it->second.hops && via < it->second.next_hop);
    }
    if (adopt) {
      routes_[node][dest] = OdRoute{via, hops, seq, now};
      dirty_[node] = true;
    }
  }

  static constexpr double kRreqRateLimit = 0.1;
  static constexpr double kBlackholeSilence = 0.5;

  std::size_t n_;
  double timeout_s_;
  std::size_t flow_src_ = kNone;
  std::size_t flow_dst_ = kNone;
  bool flow_fresh_ = true;
  std::uint64_t rreq_id_ = 0;
  double next_rreq_s_ = 0.0;
  double last_delivery_s_ = 0.0;
  std::vector<std::map<std::size_t, OdRoute>> routes_;
  std::vector<RoutingTable> tables_;
  std::vector<bool> dirty_;
  std::vector<std::map<std::size_t, std::uint64_t>> seen_;
  std::vector<std::uint64_t> own_seq_;
  std::vector<Request> pending_requests_, request_outbox_;
  std::vector<Reply> pending_replies_, reply_outbox_;
  std::vector<Error> pending_errors_, error_outbox_;
  std::vector<Probe> probes_;
  std::uint64_t sent_ = 0;
};

}  // namespace

std::unique_ptr<RoutingLayer> make_routing_layer(const ProtocolConfig& protocol,
                                                 const NetworkScenario& scenario,
                                                 std::uint64_t seed) {
  switch (protocol.variant) {
    case ProtocolVariant::SensingTriggered:
    case ProtocolVariant::FixedBeacon:
    case ProtocolVariant::AdaptiveHello:
      return std::make_unique<LinkStateRouting>(
          LinkStateRouting::Mode::EventTriggered, 0.0, scenario.node_count,
          seed);
    case ProtocolVariant::PeriodicHello:
      if (protocol.topology_flooding) {
        return std::make_unique<LinkStateRouting>(
            LinkStateRouting::Mode::Periodic, protocol.interval_s,
            scenario.node_count, seed);
      }
      return std::make_unique<DistanceVectorRouting>(
          scenario.node_count, protocol.effective_expiry(), scenario.tick_s);
    case ProtocolVariant::OnDemandDiscovery:
      return std::make_unique<OnDemandRouting>(scenario.node_count,
                                               protocol.route_timeout_s);
  }
  throw InvalidInput("unknown protocol variant");
}

namespace {

std::vector<RoutingTable> oracle_tables(
    const std::vector<std::set<std::size_t>>& adjacency) {
  std::vector<RoutingTable> tables;
  tables.reserve(adjacency.size());
  for (std::size_t i = 0; i < adjacency.size(); ++i) {
    tables.push_back(bfs_routes(i, adjacency));
  }
  return tables;
}

std::vector<std::size_t> component_labels(
    const std::vector<std::set<std::size_t>>& adjacency) {
  const std::size_t n = adjacency.size();
  std::vector<std::size_t> label(n, kNone);
  for (std::size_t start = 0; start < n; ++start) {
    if (label[start] != kNone) continue;
    label[start] = start;
    std::deque<std::size_t> queue{start};
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : adjacency[u]) {
        if (label[v] == kNone) {
          label[v] = start;
          queue.push_back(v);
        }
      }
    }
  }
  return label;
}

bool preserves_reachability(const std::vector<std::set<std::size_t>>& pre,
                            const std::vector<std::set<std::size_t>>& post) {
  const std::vector<std::size_t> before = component_labels(pre);
  const std::vector<std::size_t> after = component_labels(post);
  for (std::size_t i = 0; i < before.size(); ++i) {
    for (std::size_t j = i + 1; j < before.size(); ++j) {
      if (before[i] == before[j] && after[i] != after[j]) return false;
    }
  }
  return true;
}

bool inside_arena(const Vec3& p, const NetworkScenario& scenario) {
  const double pad = 0.5;
  return p.x >= pad && p.x <= scenario.arena.x - pad && p.y >= pad &&
         p.y <= scenario.arena.y - pad && p.z >= pad &&
         p.z <= scenario.arena.z - pad;
}

struct EventPlan {
  std::size_t anchor = 0;
  std::size_t mover = 0;
  Vec3 target;
};

/// Teleport destination that puts mover at `target_d` from anchor along
/// their current separation direction.
std::optional<Vec3> radial_target(const Vec3& anchor, const Vec3& mover,
                                  double target_d,
                                  const NetworkScenario& scenario) {
  const double d = distance(anchor, mover);
  if (d <= 0.0) return std::nullopt;
  const Vec3 q = anchor + (mover - anchor) * (target_d / d);
  if (!inside_arena(q, scenario)) return std::nullopt;
  return q;
}

double break_distance(const NetworkScenario& scenario) {
  // Outside comm plus hysteresis so the link drops cleanly, but still well
  // inside sensing range so a sensing-based tracker keeps the peer.
  return std::min(scenario.comm_range_m + scenario.hysteresis_m + 6.0,
                  scenario.sensing_range_m - 1.0);
}

double formation_distance(const NetworkScenario& scenario) {
  return scenario.comm_range_m - scenario.hysteresis_m - 6.0;
}

std::vector<EventPlan> enumerate_candidates(
    const std::vector<NodeKinematics>& state, const NetworkScenario& scenario,
    TopologyEvent event) {
  std::vector<EventPlan> plans;
  const double target_d = event == TopologyEvent::LinkBreak
                              ? break_distance(scenario)
                              : formation_distance(scenario);
  for (std::size_t a = 0; a < state.size(); ++a) {
    for (std::size_t m = 0; m < state.size(); ++m) {
      if (a == m) continue;
      const double d = distance(state[a].position, state[m].position);
      if (event == TopologyEvent::LinkBreak) {
        // Solidly linked, clear of the hysteresis band.
        if (d > scenario.comm_range_m - scenario.hysteresis_m - 2.0) continue;
      } else {
        // Solidly unlinked but within sensing reach so every protocol gets
        // the same geometry to work with.
        if (d <= scenario.comm_range_m + scenario.hysteresis_m + 2.0) continue;
        if (d > scenario.sensing_range_m) continue;
      }
      auto q = radial_target(state[a].position, state[m].position, target_d,
                             scenario);
      if (!q) continue;
      plans.push_back(EventPlan{a, m, *q});
    }
  }
  return plans;
}

void shuffle_plans(std::vector<EventPlan>& plans, Rng& rng) {
  for (std::size_t i = plans.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(std::size_t{0}, i - 1);
    std::swap(plans[i - 1], plans[j]);
  }
}

/// Follow routing tables from src toward dst, hop by hop, requiring every
/// hop to be physically within communication range. Returns the hop count,
/// or nothing if the walk dead-ends, loops, or uses a dead link.
std::optional<std::size_t> table_walk(RoutingLayer& layer,
                                      const std::vector<NodeKinematics>& state,
                                      const NetworkScenario& scenario,
                                      std::size_t src, std::size_t dst) {
  std::size_t u = src;
  std::size_t hops = 0;
  while (u != dst) {
    const RoutingTable& table = layer.routing_table(u);
    auto it = table.routes.find(dst);
    if (it == table.routes.end()) return std::nullopt;
    const std::size_t v = it->second.next_hop;
    if (distance(state[u].position, state[v].position) >
        scenario.comm_range_m) {
      return std::nullopt;
    }
    u = v;
    if (++hops > state.size()) return std::nullopt;
  }
  return hops;
}

UpdateTimeMeasurement not_injected() {
  UpdateTimeMeasurement m;
  m.event_injected = false;
  return m;
}

}  // namespace

UpdateTimeMeasurement measure_routing_update_time(
    const ProtocolConfig& protocol, const NetworkScenario& scenario,
    TopologyEvent event, std::uint64_t seed, double cap_s,
    std::optional<std::pair<std::size_t, std::size_t>> forced_pair) {
  protocol.validate();
  scenario.validate();
  if (cap_s <= 0.0) throw InvalidInput("cap_s must be positive");

  const bool on_demand =
      protocol.variant == ProtocolVariant::OnDemandDiscovery;
  if (on_demand && event == TopologyEvent::LinkFormation) {
    // A new link never invalidates the active route, so there is nothing to
    // repair and no update to time.
    return not_injected();
  }

  DiscoverySimulation sim(scenario, protocol, derive_seed({seed, kEventTag, 1}));
  auto layer = make_routing_layer(protocol, scenario,
                                  derive_seed({seed, kEventTag, 2}));
  sim.attach_routing(layer.get());
  Rng event_rng(derive_seed({seed, kEventTag, 3}));

  const auto ticks_for = [&](double seconds) {
    return static_cast<std::size_t>(std::llround(seconds / scenario.tick_s));
  };

  for (std::size_t t = 0; t < ticks_for(3.0); ++t) sim.step();
  sim.set_mobility_enabled(false);

  const auto frozen_adjacency = [&]() {
    return true_neighbor_sets(positions_of(sim.state()), scenario);
  };

  // Let routing settle on the frozen swarm before injecting anything.
  auto pre_adjacency = frozen_adjacency();
  auto pre_oracle = oracle_tables(pre_adjacency);
  OnDemandRouting* od = dynamic_cast<OnDemandRouting*>(layer.get());
  std::size_t flow_src = kNone;
  std::size_t flow_dst = kNone;
  if (od == nullptr) {
    bool quiet = false;
    const std::size_t quiesce_cap = ticks_for(40.0);
    for (std::size_t t = 0; t < quiesce_cap && !quiet; ++t) {
      sim.step();
      if (t % 10 != 0) continue;
      quiet = true;
      for (std::size_t i = 0; i < scenario.node_count && quiet; ++i) {
        quiet = layer->routing_table(i).routes == pre_oracle[i].routes;
      }
    }
    if (!quiet) return not_injected();
  } else {
    // Establish the flow whose repair will be measured: any pair at least
    // two hops apart, drawn uniformly.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < scenario.node_count; ++s) {
      for (const auto& [d, route] : pre_oracle[s].routes) {
        if (route.hop_count >= 2) pairs.emplace_back(s, d);
      }
    }
    if (pairs.empty()) return not_injected();
    const auto& flow =
        pairs[event_rng.uniform_int(std::size_t{0}, pairs.size() - 1)];
    flow_src = flow.first;
    flow_dst = flow.second;
    od->set_flow(flow_src, flow_dst);
    const std::size_t oracle_hops =
        pre_oracle[flow_src].routes.at(flow_dst).hop_count;
    bool established = false;
    const std::size_t setup_cap = ticks_for(5.0);
    for (std::size_t t = 0; t < setup_cap && !established; ++t) {
      sim.step();
      established = table_walk(*layer, sim.state(), scenario, flow_src,
                               flow_dst) == oracle_hops;
    }
    if (!established) return not_injected();
  }

  // Pick the event. Candidates are filtered so the injection flips exactly
  // the intended kind of link, changes at least one table, and does not
  // partition the network; forced pairs skip the filters.
  pre_adjacency = frozen_adjacency();
  pre_oracle = oracle_tables(pre_adjacency);
  std::optional<EventPlan> plan;
  std::vector<RoutingTable> post_oracle;
  std::vector<std::size_t> affected;

  const auto evaluate = [&](const EventPlan& candidate, bool forced) -> bool {
    std::vector<Vec3> positions = positions_of(sim.state());
    positions[candidate.mover] = candidate.target;
    auto post_adjacency = true_neighbor_sets(positions, scenario);
    if (!forced && !preserves_reachability(pre_adjacency, post_adjacency)) {
      return false;
    }
    auto oracle = oracle_tables(post_adjacency);
    std::vector<std::size_t> diff;
    for (std::size_t i = 0; i < scenario.node_count; ++i) {
      if (oracle[i].routes != pre_oracle[i].routes) diff.push_back(i);
    }
    if (!forced && diff.empty()) return false;
    if (on_demand && !forced) {
      // Only breaks on the active path dirty an on-demand route.
      bool on_path = false;
      std::size_t u = flow_src;
      std::size_t hops = 0;
      while (u != flow_dst && hops++ <= scenario.node_count) {
        auto it = layer->routing_table(u).routes.find(flow_dst);
        if (it == layer->routing_table(u).routes.end()) break;
        const std::size_t v = it->second.next_hop;
        if ((u == candidate.anchor && v == candidate.mover) ||
            (u == candidate.mover && v == candidate.anchor)) {
          on_path = true;
          break;
        }
        u = v;
      }
      if (!on_path) return false;
    }
    plan = candidate;
    post_oracle = std::move(oracle);
    affected = std::move(diff);
    return true;
  };

  if (forced_pair) {
    const auto [anchor, mover] = *forced_pair;
    if (anchor >= scenario.node_count || mover >= scenario.node_count ||
        anchor == mover) {
      throw InvalidInput("forced event pair out of range");
    }
    const double target_d = event == TopologyEvent::LinkBreak
                                ? break_distance(scenario)
                                : formation_distance(scenario);
    auto q = radial_target(sim.state()[anchor].position,
                           sim.state()[mover].position, target_d, scenario);
    if (!q) return not_injected();
    evaluate(EventPlan{anchor, mover, *q}, true);
  } else {
    auto candidates = enumerate_candidates(sim.state(), scenario, event);
    shuffle_plans(candidates, event_rng);
    for (const EventPlan& candidate : candidates) {
      if (evaluate(candidate, false)) break;
    }
  }
  if (!plan) return not_injected();

  UpdateTimeMeasurement result;
  result.event_injected = true;
  result.affected_nodes = affected.size();
  if (affected.empty()) {
    // Nothing routes over the flipped link; correction is complete the
    // moment the event happens.
    return result;
  }

  sim.teleport(plan->mover, plan->target);
  const double injected_at = sim.now_s();
  std::size_t oracle_hops = 0;
  if (on_demand) {
    auto route = post_oracle[flow_src].routes.find(flow_dst);
    if (route == post_oracle[flow_src].routes.end()) {
      // The event cut the flow's source off from its destination entirely;
      // no amount of route discovery can fix that.
      result.update_time_s = cap_s;
      result.censored = true;
      return result;
    }
    oracle_hops = route->second.hop_count;
  }

  const std::size_t cap_ticks = ticks_for(cap_s);
  for (std::size_t t = 0; t < cap_ticks; ++t) {
    sim.step();
    bool corrected = true;
    if (on_demand) {
      corrected = table_walk(*layer, sim.state(), scenario, flow_src,
                             flow_dst) == oracle_hops;
    } else {
      for (std::size_t i : affected) {
        if (layer->routing_table(i).routes != post_oracle[i].routes) {
          corrected = false;
          break;
        }
      }
    }
    if (corrected) {
      result.update_time_s = sim.now_s() - injected_at;
      return result;
    }
  }
  result.update_time_s = cap_s;
  result.censored = true;
  return result;
}

}  // namespace iscc::network
