#pragma once

#include <optional>

#include "iscc/common/geometry.hpp"
#include "iscc/control/tracking.hpp"

namespace iscc::control {

/// Kinematic envelope of one vehicle. All limits are strictly positive.
struct UavDynamics {
  double max_speed_mps = 26.0;
  double max_yaw_rate_rps = 1.0;
  double max_accel_mps2 = 8.0;
  double braking_response_s = 0.5;
  double physical_radius_m = 1.0;

  void validate() const;
};

/// Inputs of the safe-separation rule that do not depend on the instantaneous
/// closing speed: the two equivalent radii, the reaction window, and a
/// standing allowance for track prediction error.
struct SeparationPolicy {
  double radius_a_m = 0.0;
  double radius_b_m = 0.0;
  double response_s = 0.5;
  double prediction_error_m = 0.0;
};

/// Minimum center distance two objects must keep to stay safe while closing
/// at `closing_speed_mps`: the radii, plus the ground covered during the
/// reaction window, plus the prediction allowance. All inputs non-negative.
double min_safe_separation(const SeparationPolicy& policy,
                           double closing_speed_mps);

/// Outcome of a look-ahead collision screen. When no sample violates the
/// safe separation the prediction is clear and `time_to_breach_s` is
/// infinity; either way `min_distance_m` reports the closest approach seen
/// over the horizon.
struct CollisionPrediction {
  bool breach = false;
  double time_to_breach_s = 0.0;
  double min_distance_m = 0.0;
};

/// Screens a pair of tracks for loss of separation. Both tracks are
/// propagated with ekf_predict (zero process noise; only the means matter
/// here) and sampled every `step_s` out to `horizon_s`. At each sample the
/// safe distance is evaluated with the instantaneous closing speed, so the
/// required gap relaxes as the geometry opens up. The first violating sample
/// sets `time_to_breach_s`. horizon_s and step_s must be positive with
/// step_s <= horizon_s.
CollisionPrediction predict_collision(const KinematicTrack& self,
                                      const KinematicTrack& other,
                                      double horizon_s, double step_s,
                                      const SeparationPolicy& policy);

/// Yaw-rate agreement broadcast when the threat is a cooperating swarm
/// member: each side turns opposite ways so the maneuvers cannot cancel.
struct EmergencyPacket {
  double own_yaw_rate_rps = 0.0;
  double peer_yaw_rate_rps = 0.0;
};

/// Evasive maneuver: brake at full authority for the braking response
/// window, then hold `yaw_rate_rps` for the rest of the horizon. `critical`
/// flags a best-effort maneuver that still cannot restore safe separation.
struct AvoidanceManeuver {
  double brake_duration_s = 0.0;
  double yaw_rate_rps = 0.0;
  double min_separation_m = 0.0;
  bool critical = false;
  std::optional<EmergencyPacket> packet;
};

/// Current kinematic state of the maneuvering vehicle plus where it is
/// ultimately headed; the goal only breaks ties between equally safe escape
/// directions.
struct UavState {
  Vec3 position;
  Vec3 velocity;
  Vec3 goal;
};

/// Plans the evasive response to a predicted breach. The vehicle brakes at
/// `max_accel_mps2` for `braking_response_s`, then 21 candidate yaw rates
/// evenly spanning [-max_yaw_rate, +max_yaw_rate] are simulated against the
/// constant-velocity threat over `horizon_s`; the candidate maximizing the
/// minimum predicted center distance wins. Ties go to the candidate whose
/// final heading deviates least from the goal direction, then to the
/// positive yaw rate. A PeerUav threat additionally yields an
/// EmergencyPacket assigning the peer the opposite-signed yaw rate. When
/// even the best candidate cannot keep the separation demanded by `policy`,
/// the maneuver is returned flagged critical rather than rejected.
AvoidanceManeuver plan_avoidance(const UavState& self,
                                 const UavDynamics& dynamics,
                                 const KinematicTrack& threat,
                                 DetectionClass threat_class,
                                 const SeparationPolicy& policy,
                                 double horizon_s);

}  // namespace iscc::control
