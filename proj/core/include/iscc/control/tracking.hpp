#pragma once

#include <vector>

#include <Eigen/Dense>

#include "iscc/common/geometry.hpp"

namespace iscc::control {

/// What a confirmed echo return turned out to be once the communication side
/// had its say: swarm members acknowledge the detection over the feedback
/// link, everything else is treated as an obstacle.
enum class DetectionClass { PeerUav, Obstacle };

/// Classifies a detection event from its two observables. Requires an actual
/// echo (`echo_detected`); classifying a non-detection throws InvalidInput.
DetectionClass classify_detection(bool echo_detected, bool feedback_received);

/// Constant-velocity track held for one sensed object. State is position and
/// velocity; `covariance` is the joint 6x6 uncertainty ordered
/// (position, velocity) and is kept symmetric positive semidefinite by every
/// operation that touches it.
struct KinematicTrack {
  Vec3 position;
  Vec3 velocity;
  Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Zero();
  double last_update_s = 0.0;
};

/// Propagates a track forward by `dt_s` under the constant-velocity model.
/// Process noise is the piecewise white acceleration model with strength
/// `accel_noise_std` (m/s^2, applied independently per axis), which is the
/// standard discretization: position picks up dt^4/4, the cross term dt^3/2,
/// velocity dt^2 times the squared strength. The covariance is re-symmetrized
/// after the sandwich product so long prediction chains cannot drift out of
/// the PSD cone. dt_s must be positive.
KinematicTrack ekf_predict(const KinematicTrack& track, double dt_s,
                           double accel_noise_std);

/// One shared position observation of a tracked object, with its own
/// measurement covariance (symmetric positive definite).
struct PositionMeasurement {
  Vec3 position;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
};

/// Measurement update with a position-only observation. Uses the Joseph
/// stabilized form so the posterior covariance stays symmetric PSD even with
/// a suboptimal gain, and never increases the trace. `measured_at_s` becomes
/// the track's last update time. Throws DegenerateUpdate when the innovation
/// covariance cannot be inverted.
KinematicTrack ekf_update(const KinematicTrack& track,
                          const PositionMeasurement& measurement,
                          double measured_at_s);

/// Fuses position measurements of the same object reported by several
/// observers into one, by inverse-covariance (information) weighting: the
/// fused covariance is the inverse of the summed inverses, the fused position
/// the covariance-weighted mean. A single measurement comes back unchanged.
/// Throws InvalidInput on an empty list or a singular member covariance.
PositionMeasurement fuse_shared_measurements(
    const std::vector<PositionMeasurement>& measurements);

/// Sphere wrapped around a sensed object for planning purposes: the physical
/// extent inflated by three sigmas of sensing noise, so the planner clears
/// the object with margin covering its own perception error.
struct EquivalentSphere {
  Vec3 center;
  double physical_radius_m = 0.0;
  double equivalent_radius_m = 0.0;
};

/// Builds the equivalent sphere for an object of `physical_radius_m` sensed
/// with `sensing_std_m` position noise per axis. Both arguments must be
/// non-negative and the radius strictly positive.
EquivalentSphere equivalent_sphere(const Vec3& center, double physical_radius_m,
                                   double sensing_std_m);

}  // namespace iscc::control
