#pragma once

#include <vector>

#include "iscc/common/geometry.hpp"

namespace iscc::control {

/// Rotary-wing power curve coefficients. The three terms are blade profile
/// power (grows with the advance ratio squared), induced power (falls as
/// forward speed unloads the rotor), and fuselage parasite power (cubic in
/// speed). Defaults are the canonical parameter set for a small quadrotor.
struct PowerModel {
  double blade_profile_w = 79.86;
  double induced_w = 88.63;
  double tip_speed_mps = 120.0;
  double rotor_induced_mps = 4.03;
  double fuselage_drag_ratio = 0.6;
  double air_density_kgm3 = 1.225;
  double rotor_solidity = 0.05;
  double disc_area_m2 = 0.503;

  void validate() const;
};

/// Instantaneous electrical power at level flight speed `speed_mps` (>= 0).
/// At zero speed this reduces to the profile plus induced terms, i.e. hover
/// power.
double power_w(const PowerModel& model, double speed_mps);

/// Energy to fly the polyline at a constant speed per segment: sum of
/// power(v_i) * length_i / v_i. `segment_speeds` must carry one strictly
/// positive speed per segment. A path with fewer than two points costs
/// nothing.
double path_energy_j(const std::vector<Vec3>& path,
                     const std::vector<double>& segment_speeds,
                     const PowerModel& model);

/// Convenience overload: one cruise speed for every segment.
double path_energy_j(const std::vector<Vec3>& path, double cruise_mps,
                     const PowerModel& model);

}  // namespace iscc::control
