#include "iscc/network/mobility.hpp"

#include "iscc/common/errors.hpp"

namespace iscc::network {

namespace {

Vec3 uniform_point(const Vec3& box, Rng& rng) {
  return {rng.uniform(0.0, box.x), rng.uniform(0.0, box.y),
          rng.uniform(0.0, box.z)};
}

}  // namespace

std::vector<NodeKinematics> initial_swarm(const NetworkScenario& scenario,
                                          Rng& rng) {
  scenario.validate();
  std::vector<NodeKinematics> state(scenario.node_count);
  for (std::size_t i = 0; i < scenario.node_count; ++i) {
    NodeKinematics& node = state[i];
    node.id = i;
    node.position = uniform_point(scenario.arena, rng);
    node.waypoint = uniform_point(scenario.arena, rng);
    node.speed_mps = rng.uniform(scenario.speed_min_mps, scenario.speed_max_mps);
    const Vec3 heading = node.waypoint - node.position;
    const double d = norm(heading);
    node.velocity = d > 0.0 ? heading * (node.speed_mps / d) : Vec3{};
  }
  return state;
}

void step_random_waypoint(std::vector<NodeKinematics>& state,
                          const NetworkScenario& scenario, double dt,
                          Rng& rng) {
  if (dt <= 0.0) {
    throw InvalidInput("mobility step requires dt > 0");
  }
  for (NodeKinematics& node : state) {
    double remaining = dt;
    // A node can pass through at most a couple of waypoints per 10 ms tick;
    // the bound only guards against a pathological zero-length leg draw.
    for (int leg = 0; leg < 16 && remaining > 0.0; ++leg) {
      const Vec3 to_waypoint = node.waypoint - node.position;
      const double d = norm(to_waypoint);
      const double reach = node.speed_mps * remaining;
      if (d <= reach) {
        node.position = node.waypoint;
        remaining -= node.speed_mps > 0.0 ? d / node.speed_mps : remaining;
        node.waypoint = uniform_point(scenario.arena, rng);
        node.speed_mps =
            rng.uniform(scenario.speed_min_mps, scenario.speed_max_mps);
      } else {
        node.position += to_waypoint * (reach / d);
        remaining = 0.0;
      }
    }
    const Vec3 heading = node.waypoint - node.position;
    const double d = norm(heading);
    node.velocity = d > 0.0 ? heading * (node.speed_mps / d) : Vec3{};
  }
}

std::vector<PeerObservation> sense_peers(
    std::size_t observer, const std::vector<NodeKinematics>& state,
    const NetworkScenario& scenario, double noise_std, Rng& rng) {
  if (noise_std < 0.0) {
    throw InvalidInput("sensing noise_std must be non-negative");
  }
  if (observer >= state.size()) {
    throw InvalidInput("observer id out of range");
  }
  std::vector<PeerObservation> observations;
  const Vec3 own = state[observer].position;
  for (const NodeKinematics& peer : state) {
    if (peer.id == observer) continue;
    if (distance(own, peer.position) > scenario.sensing_range_m) continue;
    PeerObservation obs;
    obs.track_key = peer.id;
    obs.position = peer.position;
    if (noise_std > 0.0) {
      obs.position += Vec3{rng.normal(0.0, noise_std),
                           rng.normal(0.0, noise_std),
                           rng.normal(0.0, noise_std)};
    }
    obs.velocity = peer.velocity;
    observations.push_back(obs);
  }
  return observations;
}

std::vector<Vec3> positions_of(const std::vector<NodeKinematics>& state) {
  std::vector<Vec3> positions(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    positions[i] = state[i].position;
  }
  return positions;
}

}  // namespace iscc::network
