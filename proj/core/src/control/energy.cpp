#include "iscc/control/energy.hpp"

#include <cmath>

#include "iscc/common/errors.hpp"

namespace iscc::control {

void PowerModel::validate() const {
  if (!(blade_profile_w > 0.0) || !(induced_w > 0.0) ||
      !(tip_speed_mps > 0.0) || !(rotor_induced_mps > 0.0) ||
      fuselage_drag_ratio < 0.0 || !(air_density_kgm3 > 0.0) ||
      !(rotor_solidity > 0.0) || !(disc_area_m2 > 0.0)) {
    throw InvalidInput("PowerModel: coefficients must be positive");
  }
}

double power_w(const PowerModel& model, double speed_mps) {
  model.validate();
  if (speed_mps < 0.0) {
    throw InvalidInput("power_w: negative speed");
  }
  const double v2 = speed_mps * speed_mps;
  const double tip2 = model.tip_speed_mps * model.tip_speed_mps;
  const double profile = model.blade_profile_w * (1.0 + 3.0 * v2 / tip2);

  const double v0_2 = model.rotor_induced_mps * model.rotor_induced_mps;
  const double induced =
      model.induced_w *
      std::sqrt(std::sqrt(1.0 + v2 * v2 / (4.0 * v0_2 * v0_2)) -
                v2 / (2.0 * v0_2));

  const double parasite = 0.5 * model.fuselage_drag_ratio *
                          model.air_density_kgm3 * model.rotor_solidity *
                          model.disc_area_m2 * v2 * speed_mps;
  return profile + induced + parasite;
}

double path_energy_j(const std::vector<Vec3>& path,
                     const std::vector<double>& segment_speeds,
                     const PowerModel& model) {
  if (path.size() < 2) {
    if (!segment_speeds.empty()) {
      throw InvalidInput("path_energy_j: speeds without segments");
    }
    return 0.0;
  }
  if (segment_speeds.size() != path.size() - 1) {
    throw InvalidInput("path_energy_j: one speed per segment required");
  }

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double v = segment_speeds[i];
    if (!(v > 0.0)) {
      throw InvalidInput("path_energy_j: speeds must be positive");
    }
    total += power_w(model, v) * distance(path[i], path[i + 1]) / v;
  }
  return total;
}

double path_energy_j(const std::vector<Vec3>& path, double cruise_mps,
                     const PowerModel& model) {
  if (path.size() < 2) {
    return 0.0;
  }
  return path_energy_j(
      path, std::vector<double>(path.size() - 1, cruise_mps), model);
}

}  // namespace iscc::control
