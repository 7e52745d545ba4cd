#include "iscc/control/avoidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "iscc/common/errors.hpp"

namespace iscc::control {

namespace {

constexpr int kYawCandidates = 21;

/// Position of the evading vehicle `t` seconds into a maneuver that brakes
/// at `accel` for `brake_s` (not below standstill) and afterwards holds
/// speed while yawing the horizontal velocity at `yaw_rate`.
Vec3 maneuver_position(const Vec3& start, const Vec3& velocity, double accel,
                       double brake_s, double yaw_rate, double t) {
  const double speed = norm(velocity);
  if (speed <= 0.0) {
    return start;
  }
  const Vec3 heading = velocity * (1.0 / speed);

  const double stop_t = speed / accel;
  const double brake_t = std::min({t, brake_s, stop_t});
  // Distance covered while decelerating; a vehicle that reaches standstill
  // before the window ends just sits there.
  const double along = speed * brake_t - 0.5 * accel * brake_t * brake_t;
  const double braked_speed = speed - accel * std::min(brake_s, stop_t);
  if (t <= brake_s) {
    return start + heading * along;
  }
  const Vec3 pos = start + heading * along;

  // Yaw phase: rotate the horizontal velocity component at the candidate
  // rate; vertical speed is preserved.
  const double tau = t - brake_s;
  const Vec3 v{heading.x * braked_speed, heading.y * braked_speed,
               heading.z * braked_speed};
  const double h = std::hypot(v.x, v.y);
  if (h <= 1e-12 || yaw_rate == 0.0) {
    return pos + v * tau;
  }
  const double phi0 = std::atan2(v.y, v.x);
  // Integral of (h cos(phi0 + w s), h sin(phi0 + w s)) over s in [0, tau].
  const double w = yaw_rate;
  const double dx = h / w * (std::sin(phi0 + w * tau) - std::sin(phi0));
  const double dy = h / w * (std::cos(phi0) - std::cos(phi0 + w * tau));
  return pos + Vec3{dx, dy, v.z * tau};
}

double final_heading(const Vec3& velocity, double brake_s, double yaw_rate,
                     double horizon_s) {
  const double phi0 = std::atan2(velocity.y, velocity.x);
  return phi0 + yaw_rate * std::max(0.0, horizon_s - brake_s);
}

}  // namespace

void UavDynamics::validate() const {
  if (!(max_speed_mps > 0.0) || !(max_yaw_rate_rps > 0.0) ||
      !(max_accel_mps2 > 0.0) || !(braking_response_s > 0.0) ||
      !(physical_radius_m > 0.0)) {
    throw InvalidInput("UavDynamics: all limits must be positive");
  }
}

double min_safe_separation(const SeparationPolicy& policy,
                           double closing_speed_mps) {
  if (policy.radius_a_m < 0.0 || policy.radius_b_m < 0.0 ||
      policy.response_s < 0.0 || policy.prediction_error_m < 0.0 ||
      closing_speed_mps < 0.0) {
    throw InvalidInput("min_safe_separation: negative input");
  }
  return policy.radius_a_m + policy.radius_b_m +
         closing_speed_mps * policy.response_s + policy.prediction_error_m;
}

CollisionPrediction predict_collision(const KinematicTrack& self,
                                      const KinematicTrack& other,
                                      double horizon_s, double step_s,
                                      const SeparationPolicy& policy) {
  if (!(horizon_s > 0.0) || !(step_s > 0.0) || step_s > horizon_s) {
    throw InvalidInput("predict_collision: bad horizon or step");
  }

  CollisionPrediction prediction;
  prediction.time_to_breach_s = std::numeric_limits<double>::infinity();
  prediction.min_distance_m = std::numeric_limits<double>::infinity();

  KinematicTrack a = self;
  KinematicTrack b = other;
  for (double t = 0.0; t <= horizon_s + 1e-12; t += step_s) {
    if (t > 0.0) {
      a = ekf_predict(a, step_s, 0.0);
      b = ekf_predict(b, step_s, 0.0);
    }
    const double d = distance(a.position, b.position);
    prediction.min_distance_m = std::min(prediction.min_distance_m, d);

    const Vec3 rel_v = b.velocity - a.velocity;
    const Vec3 sep = b.position - a.position;
    const double sep_norm = norm(sep);
    double closing = 0.0;
    if (sep_norm > 1e-12) {
      closing = std::max(0.0, -dot(rel_v, sep) / sep_norm);
    }
    if (!prediction.breach && d < min_safe_separation(policy, closing)) {
      prediction.breach = true;
      prediction.time_to_breach_s = t;
    }
  }
  return prediction;
}

AvoidanceManeuver plan_avoidance(const UavState& self,
                                 const UavDynamics& dynamics,
                                 const KinematicTrack& threat,
                                 DetectionClass threat_class,
                                 const SeparationPolicy& policy,
                                 double horizon_s) {
  dynamics.validate();
  if (!(horizon_s > 0.0)) {
    throw InvalidInput("plan_avoidance: horizon must be positive");
  }

  const double brake_s = dynamics.braking_response_s;
  const double eval_step = horizon_s / 100.0;
  const Vec3 goal_dir = self.goal - self.position;
  const double goal_heading = std::atan2(goal_dir.y, goal_dir.x);

  AvoidanceManeuver best;
  best.brake_duration_s = brake_s;
  double best_sep = -1.0;
  double best_dev = std::numeric_limits<double>::infinity();

  for (int i = 0; i < kYawCandidates; ++i) {
    const double yaw = dynamics.max_yaw_rate_rps *
                       (2.0 * i / (kYawCandidates - 1) - 1.0);
    double min_sep = std::numeric_limits<double>::infinity();
    for (double t = 0.0; t <= horizon_s + 1e-12; t += eval_step) {
      const Vec3 own = maneuver_position(self.position, self.velocity,
                                         dynamics.max_accel_mps2, brake_s,
                                         yaw, t);
      const Vec3 theirs = threat.position + threat.velocity * t;
      min_sep = std::min(min_sep, distance(own, theirs));
    }

    const double dev = std::abs(std::remainder(
        final_heading(self.velocity, brake_s, yaw, horizon_s) - goal_heading,
        2.0 * std::numbers::pi));
    bool better = false;
    if (min_sep > best_sep + 1e-9) {
      better = true;
    } else if (min_sep > best_sep - 1e-9) {
      // Separation tie: prefer staying pointed at the goal, then the
      // positive turn direction.
      better = dev < best_dev - 1e-9 ||
               (dev < best_dev + 1e-9 && yaw > best.yaw_rate_rps);
    }
    if (better) {
      best_sep = min_sep;
      best_dev = dev;
      best.yaw_rate_rps = yaw;
      best.min_separation_m = min_sep;
    }
  }

  // The bare radii (no closing term: the maneuver's whole point is to zero
  // the closure) decide whether the best effort is actually safe.
  best.critical =
      best.min_separation_m <= policy.radius_a_m + policy.radius_b_m;
  if (threat_class == DetectionClass::PeerUav) {
    const double sign = best.yaw_rate_rps >= 0.0 ? 1.0 : -1.0;
    best.packet = EmergencyPacket{best.yaw_rate_rps,
                                  -sign * dynamics.max_yaw_rate_rps};
  }
  return best;
}

}  // namespace iscc::control
