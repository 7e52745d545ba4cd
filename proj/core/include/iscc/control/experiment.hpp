#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iscc/common/geometry.hpp"
#include "iscc/control/avoidance.hpp"
#include "iscc/control/energy.hpp"
#include "iscc/control/planner.hpp"

namespace iscc::control {

/// Replanning sweep: for each obstacle radius and trial, plan across the
/// arena, inject a dynamic obstacle onto the path so a breach is predicted,
/// brake, and repair the plan twice, once reusing the tree and once from
/// scratch, under identical environments. Flights (and the energy metric)
/// run at half the speed limit.
struct ControlExperimentConfig {
  Vec3 bounds{300.0, 300.0, 100.0};
  std::vector<double> obstacle_radii_m{20.0, 30.0, 40.0, 50.0, 60.0};
  double obstacle_speed_mps = 5.0;
  UavDynamics dynamics;
  double sensing_std_m = 0.5;
  RrtParams plan;
  /// Expansion budget for the regrow phase of tree-reusing repairs.
  std::size_t replan_iterations = 1000;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  /// Re-run each timed repair three times on fresh copies and keep the
  /// fastest wall-clock, de-noising the delay columns. Functional outputs
  /// always come from the first run.
  bool timing_exclusive = true;
  PowerModel power;

  void validate() const;
};

/// One planner arm of one trial. Everything except the delay column is a
/// pure function of the config seed.
struct ControlTrialRow {
  std::string planner;  // "reuse" or "scratch"
  double obstacle_radius_m = 0.0;
  std::size_t trial = 0;
  double replanning_delay_ms = 0.0;
  std::size_t expansions = 0;
  double path_length_m = 0.0;
  double energy_j = 0.0;
  bool collided = false;
};

std::vector<ControlTrialRow> run_control_experiment(
    const ControlExperimentConfig& config);

/// Monte Carlo collision study over full start-to-goal flights against
/// moving obstacles. With avoidance enabled the vehicle screens its sensed
/// surroundings for predicted breaches, brakes, and replans around the
/// intruder; disabled, it flies the initial plan blind. A collision is a
/// ground-truth event: centers closer than the sum of physical radii.
struct CollisionStudyConfig {
  /// Obstacle layout, or a template for one when `randomize_layout` is set
  /// (radii kept, positions and headings redrawn each trial).
  Environment3d env;
  Vec3 start;
  Vec3 goal;
  UavDynamics dynamics;
  double sensing_std_m = 0.5;
  bool avoidance_enabled = true;
  bool randomize_layout = true;
  double obstacle_speed_mps = 5.0;
  RrtParams plan;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct CollisionEstimate {
  std::size_t collisions = 0;
  std::size_t trials = 0;
  double probability = 0.0;
  /// Wilson 95% binomial interval on the probability.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

CollisionEstimate collision_probability(const CollisionStudyConfig& config);

}  // namespace iscc::control
