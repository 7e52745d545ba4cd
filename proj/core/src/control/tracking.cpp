#include "iscc/control/tracking.hpp"

#include <cmath>

#include "iscc/common/errors.hpp"

namespace iscc::control {

namespace {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

Vector6 state_of(const KinematicTrack& track) {
  Vector6 x;
  x << track.position.x, track.position.y, track.position.z, track.velocity.x,
      track.velocity.y, track.velocity.z;
  return x;
}

void write_state(KinematicTrack& track, const Vector6& x) {
  track.position = {x(0), x(1), x(2)};
  track.velocity = {x(3), x(4), x(5)};
}

void symmetrize(Matrix6& m) { m = ((m + m.transpose()) * 0.5).eval(); }

}  // namespace

DetectionClass classify_detection(bool echo_detected, bool feedback_received) {
  if (!echo_detected) {
    throw InvalidInput("classify_detection: nothing was detected");
  }
  return feedback_received ? DetectionClass::PeerUav : DetectionClass::Obstacle;
}

KinematicTrack ekf_predict(const KinematicTrack& track, double dt_s,
                           double accel_noise_std) {
  if (!(dt_s > 0.0)) {
    throw InvalidInput("ekf_predict: dt must be positive");
  }
  if (accel_noise_std < 0.0) {
    throw InvalidInput("ekf_predict: negative acceleration noise");
  }

  Matrix6 f = Matrix6::Identity();
  f.topRightCorner<3, 3>() = dt_s * Eigen::Matrix3d::Identity();

  const double q = accel_noise_std * accel_noise_std;
  const double dt2 = dt_s * dt_s;
  Matrix6 process = Matrix6::Zero();
  process.topLeftCorner<3, 3>() =
      (q * dt2 * dt2 / 4.0) * Eigen::Matrix3d::Identity();
  process.topRightCorner<3, 3>() =
      (q * dt2 * dt_s / 2.0) * Eigen::Matrix3d::Identity();
  process.bottomLeftCorner<3, 3>() = process.topRightCorner<3, 3>();
  process.bottomRightCorner<3, 3>() = (q * dt2) * Eigen::Matrix3d::Identity();

  KinematicTrack out = track;
  write_state(out, f * state_of(track));
  out.covariance = f * track.covariance * f.transpose() + process;
  symmetrize(out.covariance);
  out.last_update_s = track.last_update_s + dt_s;
  return out;
}

KinematicTrack ekf_update(const KinematicTrack& track,
                          const PositionMeasurement& measurement,
                          double measured_at_s) {
  const Eigen::Matrix3d& r = measurement.covariance;
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + r.norm())) {
    throw InvalidInput("ekf_update: measurement covariance not symmetric");
  }

  Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
  h.leftCols<3>() = Eigen::Matrix3d::Identity();

  const Eigen::Matrix3d innovation_cov =
      h * track.covariance * h.transpose() + r;
  Eigen::LDLT<Eigen::Matrix3d> ldlt(innovation_cov);
  // LDLT happily factors near-singular matrices; gate on the pivot spread
  // so a gain is only formed when the inverse is trustworthy.
  const Eigen::Vector3d d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 0.0 ||
      d.minCoeff() < 1e-12 * d.maxCoeff()) {
    throw DegenerateUpdate("ekf_update: singular innovation covariance");
  }

  const Eigen::Matrix<double, 6, 3> gain =
      track.covariance * h.transpose() * ldlt.solve(Eigen::Matrix3d::Identity());

  Eigen::Vector3d z;
  z << measurement.position.x, measurement.position.y, measurement.position.z;
  const Vector6 prior = state_of(track);
  const Vector6 posterior = prior + gain * (z - h * prior);

  const Matrix6 closed = Matrix6::Identity() - gain * h;
  Matrix6 cov = closed * track.covariance * closed.transpose() +
                gain * r * gain.transpose();
  symmetrize(cov);

  KinematicTrack out = track;
  write_state(out, posterior);
  out.covariance = cov;
  out.last_update_s = measured_at_s;
  return out;
}

PositionMeasurement fuse_shared_measurements(
    const std::vector<PositionMeasurement>& measurements) {
  if (measurements.empty()) {
    throw InvalidInput("fuse_shared_measurements: no measurements");
  }
  if (measurements.size() == 1) {
    return measurements.front();
  }

  Eigen::Matrix3d information = Eigen::Matrix3d::Zero();
  Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
  for (const PositionMeasurement& m : measurements) {
    Eigen::LDLT<Eigen::Matrix3d> ldlt(m.covariance);
    const Eigen::Vector3d d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 0.0 ||
        d.minCoeff() < 1e-12 * d.maxCoeff()) {
      throw InvalidInput("fuse_shared_measurements: singular covariance");
    }
    const Eigen::Matrix3d inv = ldlt.solve(Eigen::Matrix3d::Identity());
    information += inv;
    weighted += inv * Eigen::Vector3d(m.position.x, m.position.y, m.position.z);
  }

  const Eigen::Matrix3d fused_cov =
      information.ldlt().solve(Eigen::Matrix3d::Identity());
  const Eigen::Vector3d fused = fused_cov * weighted;

  PositionMeasurement out;
  out.position = {fused(0), fused(1), fused(2)};
  out.covariance = ((fused_cov + fused_cov.transpose()) * 0.5).eval();
  return out;
}

EquivalentSphere equivalent_sphere(const Vec3& center, double physical_radius_m,
                                   double sensing_std_m) {
  if (!(physical_radius_m > 0.0)) {
    throw InvalidInput("equivalent_sphere: radius must be positive");
  }
  if (sensing_std_m < 0.0) {
    throw InvalidInput("equivalent_sphere: negative sensing noise");
  }
  return {center, physical_radius_m, physical_radius_m + 3.0 * sensing_std_m};
}

}  // namespace iscc::control
