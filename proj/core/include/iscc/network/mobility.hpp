#pragma once

#include <cstddef>
#include <vector>

#include "iscc/common/geometry.hpp"
#include "iscc/common/rng.hpp"
#include "iscc/network/scenario.hpp"

namespace iscc::network {

struct NodeKinematics {
  std::size_t id = 0;
  Vec3 position;
  Vec3 velocity;
  Vec3 waypoint;
  double speed_mps = 0.0;
};

/// Uniform initial placement: per node draws position, waypoint, then cruise
/// speed, in id order, so a given seed reproduces the exact same swarm.
std::vector<NodeKinematics> initial_swarm(const NetworkScenario& scenario,
                                          Rng& rng);

/// Random-waypoint step with zero pause time. Each node advances toward its
/// waypoint at its drawn speed; on arrival it immediately draws a fresh
/// uniform waypoint and a fresh uniform speed and spends the remainder of dt
/// moving toward it. Positions stay inside the arena because waypoints do and
/// the arena is convex. Throws InvalidInput on dt <= 0.
void step_random_waypoint(std::vector<NodeKinematics>& state,
                          const NetworkScenario& scenario, double dt, Rng& rng);

/// One sensed peer. track_key stands in for the physical-feature track handle
/// a real sensor pipeline would maintain; data association is assumed perfect,
/// so it numerically equals the peer id, but protocol logic must not treat it
/// as a network identity until a beacon has bound one to the track.
struct PeerObservation {
  std::size_t track_key = 0;
  Vec3 position;
  Vec3 velocity;
};

/// Kinematics of every peer within sensing_range of the observer (boundary
/// inclusive), position perturbed by isotropic Gaussian noise of the given
/// std (noiseless when zero). Peers appear in id order and each in-range peer
/// consumes exactly three normal draws when noise is on, keeping the stream
/// layout seed-stable.
std::vector<PeerObservation> sense_peers(std::size_t observer,
                                         const std::vector<NodeKinematics>& state,
                                         const NetworkScenario& scenario,
                                         double noise_std, Rng& rng);

std::vector<Vec3> positions_of(const std::vector<NodeKinematics>& state);

}  // namespace iscc::network
