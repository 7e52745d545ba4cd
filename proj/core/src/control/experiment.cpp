#include "iscc/control/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "iscc/common/errors.hpp"
#include "iscc/common/rng.hpp"

namespace iscc::control {

namespace {

constexpr std::uint64_t kControlSweepTag = 0x4354524c;  // "CTRL"
constexpr std::uint64_t kCollisionTag = 0x434f4c4c;     // "COLL"
constexpr std::uint64_t kFlightTag = 0x464c5953;        // "FLYS"

constexpr double kTickS = 0.05;
constexpr double kFlightCapS = 120.0;
constexpr double kScreenHorizonS = 4.0;
constexpr double kScreenStepS = 0.2;
constexpr double kReplanIntervalS = 1.0;
constexpr double kEscapeEnterM = 2.0;
constexpr double kEscapeExitM = 6.0;

Vec3 unit_or(const Vec3& v, const Vec3& fallback) {
  const double n = norm(v);
  return n > 1e-12 ? v * (1.0 / n) : fallback;
}

void advance_obstacles(Environment3d& env, double dt) {
  for (Obstacle& obstacle : env.obstacles) {
    Vec3 c = obstacle.sphere.center + obstacle.velocity * dt;
    auto bounce = [](double& x, double& v, double hi) {
      if (x < 0.0) {
        x = -x;
        v = -v;
      } else if (x > hi) {
        x = 2.0 * hi - x;
        v = -v;
      }
    };
    bounce(c.x, obstacle.velocity.x, env.bounds.x);
    bounce(c.y, obstacle.velocity.y, env.bounds.y);
    bounce(c.z, obstacle.velocity.z, env.bounds.z);
    obstacle.sphere.center = c;
  }
}

struct FlightParams {
  Environment3d truth;
  Vec3 start;
  Vec3 goal;
  UavDynamics dynamics;
  double sensing_std = 0.0;
  bool avoidance = true;
  RrtParams replan;
  std::uint64_t seed = 0;
};

struct FlightOutcome {
  bool collided = false;
  bool reached = false;
};

/// Flies the tree's goal path against moving obstacles. With avoidance on,
/// the vehicle senses obstacle centers (noisy), screens for predicted
/// breaches while cruising, and reacts by braking to a stop and replanning
/// from where it ends up; an obstacle encroaching on a stopped vehicle
/// triggers a straight-line escape first. Ground truth collisions (sum of
/// physical radii) are recorded regardless of what the vehicle believes.
FlightOutcome simulate_flight(const FlightParams& fp, PlanTree tree,
                              Rng& noise) {
  FlightOutcome outcome;
  if (tree.goal_path.empty()) {
    return outcome;
  }

  std::vector<Vec3> waypoints = goal_path_points(tree);
  waypoints.push_back(fp.goal);
  std::size_t wp = 1;

  Environment3d truth = fp.truth;
  const double cruise = fp.dynamics.max_speed_mps * 0.5;
  const std::size_t screen_every =
      std::max<std::size_t>(1, std::llround(kScreenStepS / kTickS));

  enum class Mode { Cruise, React, Brake, Hover, Escape };
  Mode mode = Mode::Cruise;
  double mode_until = 0.0;
  double last_replan = -kReplanIntervalS;
  std::uint64_t replans = 0;

  Vec3 pos = fp.start;
  Vec3 heading = unit_or(waypoints[wp] - pos, Vec3{1.0, 0.0, 0.0});
  double speed = cruise;

  std::vector<Vec3> sensed(truth.obstacles.size());
  auto sense = [&]() {
    for (std::size_t i = 0; i < truth.obstacles.size(); ++i) {
      sensed[i] = truth.obstacles[i].sphere.center;
      if (fp.sensing_std > 0.0) {
        sensed[i] += Vec3{noise.normal(0.0, fp.sensing_std),
                          noise.normal(0.0, fp.sensing_std),
                          noise.normal(0.0, fp.sensing_std)};
      }
    }
  };
  auto sensed_env = [&]() {
    Environment3d snapshot;
    snapshot.bounds = truth.bounds;
    for (std::size_t i = 0; i < truth.obstacles.size(); ++i) {
      Obstacle o = truth.obstacles[i];
      o.sphere.center = {std::clamp(sensed[i].x, 0.0, truth.bounds.x),
                         std::clamp(sensed[i].y, 0.0, truth.bounds.y),
                         std::clamp(sensed[i].z, 0.0, truth.bounds.z)};
      snapshot.obstacles.push_back(o);
    }
    return snapshot;
  };
  // Nearest sensed obstacle measured by how far its equivalent sphere
  // encroaches on us; returns margin and index.
  auto closest_margin = [&](std::size_t& index) {
    double margin = std::numeric_limits<double>::infinity();
    index = truth.obstacles.size();
    for (std::size_t i = 0; i < truth.obstacles.size(); ++i) {
      const double m = distance(pos, sensed[i]) -
                       truth.obstacles[i].sphere.equivalent_radius_m -
                       fp.dynamics.physical_radius_m;
      if (m < margin) {
        margin = m;
        index = i;
      }
    }
    return margin;
  };

  std::size_t tick = 0;
  for (double t = 0.0; t < kFlightCapS; t += kTickS, ++tick) {
    // Controller.
    if (fp.avoidance && !truth.obstacles.empty()) {
      if (mode == Mode::Cruise && tick % screen_every == 0) {
        sense();
        KinematicTrack self;
        self.position = pos;
        self.velocity = heading * speed;
        bool breach = false;
        for (std::size_t i = 0; i < truth.obstacles.size() && !breach; ++i) {
          const Obstacle& obstacle = truth.obstacles[i];
          SeparationPolicy policy{fp.dynamics.physical_radius_m,
                                  obstacle.sphere.equivalent_radius_m,
                                  fp.dynamics.braking_response_s, 0.0};
          const double closing_max = speed + norm(obstacle.velocity);
          const double gate = min_safe_separation(policy, closing_max) +
                              closing_max * kScreenHorizonS;
          if (distance(pos, sensed[i]) > gate) {
            continue;
          }
          KinematicTrack threat;
          threat.position = sensed[i];
          threat.velocity = obstacle.velocity;
          breach = predict_collision(self, threat, kScreenHorizonS,
                                     kScreenStepS, policy)
                       .breach;
        }
        if (breach) {
          mode = Mode::React;
          mode_until = t + fp.dynamics.braking_response_s;
        }
      } else if (mode != Mode::Cruise) {
        sense();
        std::size_t offender = 0;
        const double margin = closest_margin(offender);
        if (mode == Mode::Escape) {
          if (margin > kEscapeExitM) {
            mode = Mode::Hover;
            speed = 0.0;
          } else {
            heading = unit_or(pos - sensed[offender], Vec3{1.0, 0.0, 0.0});
            speed = fp.dynamics.max_speed_mps;
          }
        } else if (margin < kEscapeEnterM) {
          mode = Mode::Escape;
          heading = unit_or(pos - sensed[offender], Vec3{1.0, 0.0, 0.0});
          speed = fp.dynamics.max_speed_mps;
        } else if (mode == Mode::React && t >= mode_until - 1e-9) {
          mode = Mode::Brake;
        } else if (mode == Mode::Brake && speed <= 0.0) {
          mode = Mode::Hover;
        } else if (mode == Mode::Hover &&
                   t - last_replan >= kReplanIntervalS - 1e-9) {
          last_replan = t;
          const Environment3d snapshot = sensed_env();
          if (point_clear(snapshot, pos) && point_clear(snapshot, fp.goal)) {
            const ReplanResult repaired = replan_with_reuse(
                tree, snapshot, pos, fp.goal, fp.replan,
                derive_seed({fp.seed, kFlightTag, ++replans}));
            if (repaired.success) {
              tree = repaired.tree;
              waypoints = goal_path_points(tree);
              waypoints.push_back(fp.goal);
              wp = 1;
              mode = Mode::Cruise;
              speed = cruise;
              heading = unit_or(waypoints[wp] - pos, heading);
            }
          }
        }
      }
    }

    // Kinematics.
    switch (mode) {
      case Mode::Cruise: {
        while (wp + 1 < waypoints.size() &&
               distance(pos, waypoints[wp]) <= 1.0) {
          ++wp;
        }
        heading = unit_or(waypoints[wp] - pos, heading);
        speed = cruise;
        break;
      }
      case Mode::React:
        break;  // reaction latency: keep flying as-is
      case Mode::Brake:
        speed = std::max(0.0, speed - fp.dynamics.max_accel_mps2 * kTickS);
        break;
      case Mode::Hover:
        speed = 0.0;
        break;
      case Mode::Escape:
        break;  // heading and speed set by the controller
    }
    pos += heading * (speed * kTickS);
    pos = {std::clamp(pos.x, 0.0, truth.bounds.x),
           std::clamp(pos.y, 0.0, truth.bounds.y),
           std::clamp(pos.z, 0.0, truth.bounds.z)};
    advance_obstacles(truth, kTickS);

    for (const Obstacle& obstacle : truth.obstacles) {
      if (distance(pos, obstacle.sphere.center) <
          fp.dynamics.physical_radius_m + obstacle.sphere.physical_radius_m) {
        outcome.collided = true;
        return outcome;
      }
    }
    if (distance(pos, fp.goal) <= fp.replan.goal_radius_m) {
      outcome.reached = true;
      return outcome;
    }
  }
  return outcome;
}

struct ArcPoint {
  Vec3 position;
  Vec3 tangent;
};

ArcPoint point_at_arc(const std::vector<Vec3>& path, double arc) {
  double remaining = std::max(0.0, arc);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec3 seg = path[i] - path[i - 1];
    const double len = norm(seg);
    if (remaining <= len || i + 1 == path.size()) {
      const double f = len > 1e-12 ? std::min(remaining, len) / len : 0.0;
      return {path[i - 1] + seg * f, unit_or(seg, Vec3{1.0, 0.0, 0.0})};
    }
    remaining -= len;
  }
  return {path.back(), Vec3{1.0, 0.0, 0.0}};
}

}  // namespace

void ControlExperimentConfig::validate() const {
  if (!(bounds.x > 0.0) || !(bounds.y > 0.0) || !(bounds.z > 0.0)) {
    throw InvalidInput("control experiment: bounds must be positive");
  }
  if (obstacle_radii_m.empty()) {
    throw InvalidInput("control experiment: no obstacle radii");
  }
  for (const double r : obstacle_radii_m) {
    if (!(r > 0.0)) {
      throw InvalidInput("control experiment: obstacle radius unusable");
    }
  }
  if (obstacle_speed_mps < 0.0 || sensing_std_m < 0.0) {
    throw InvalidInput("control experiment: negative speed or noise");
  }
  if (trials == 0) {
    throw InvalidInput("control experiment: need at least one trial");
  }
  dynamics.validate();
  plan.validate();
  power.validate();
}

std::vector<ControlTrialRow> run_control_experiment(
    const ControlExperimentConfig& config) {
  config.validate();
  const double cruise = config.dynamics.max_speed_mps * 0.5;

  RrtParams regrow = config.plan;
  regrow.iterations = config.replan_iterations;

  std::vector<ControlTrialRow> rows;
  rows.reserve(2 * config.obstacle_radii_m.size() * config.trials);

  for (std::size_t ri = 0; ri < config.obstacle_radii_m.size(); ++ri) {
    const double radius = config.obstacle_radii_m[ri];
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const std::uint64_t cell_seed =
          derive_seed({config.seed, kControlSweepTag, ri, trial});
      Rng rng(cell_seed);

      // A cross-arena mission, endpoints jittered trial to trial.
      const Vec3 start{12.0,
                       rng.uniform(60.0, config.bounds.y - 60.0),
                       rng.uniform(25.0, config.bounds.z - 25.0)};
      const Vec3 goal{config.bounds.x - 12.0,
                      rng.uniform(60.0, config.bounds.y - 60.0),
                      rng.uniform(25.0, config.bounds.z - 25.0)};

      Environment3d open;
      open.bounds = config.bounds;
      PlanTree tree;
      for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
        tree = rrt_star(open, start, goal, config.plan,
                        derive_seed({cell_seed, 1, attempt}));
        if (!tree.goal_path.empty()) {
          break;
        }
      }
      if (tree.goal_path.empty()) {
        throw UnidentifiableConfiguration(
            "control experiment: initial plan failed in an open arena");
      }
      const std::vector<Vec3> path = goal_path_points(tree);
      const double total_arc = path_length(path);

      // Park the intruder on the path midpoint, closing head-on, and put
      // the vehicle far enough up the path that the breach is predicted
      // rather than already happening.
      const EquivalentSphere sphere =
          equivalent_sphere(point_at_arc(path, total_arc / 2.0).position,
                            radius, config.sensing_std_m);
      double back = sphere.equivalent_radius_m + 45.0;
      ArcPoint uav = point_at_arc(path, total_arc / 2.0 - back);
      while (distance(uav.position, sphere.center) <
                 sphere.equivalent_radius_m + 15.0 &&
             back < total_arc / 2.0) {
        back += 10.0;
        uav = point_at_arc(path, total_arc / 2.0 - back);
      }

      Obstacle intruder;
      intruder.sphere = sphere;
      intruder.velocity =
          unit_or(uav.position - sphere.center, Vec3{-1.0, 0.0, 0.0}) *
          config.obstacle_speed_mps;

      {
        KinematicTrack self;
        self.position = uav.position;
        self.velocity = uav.tangent * cruise;
        KinematicTrack threat;
        threat.position = intruder.sphere.center;
        threat.velocity = intruder.velocity;
        const SeparationPolicy policy{config.dynamics.physical_radius_m,
                                      sphere.equivalent_radius_m,
                                      config.dynamics.braking_response_s, 0.0};
        if (!predict_collision(self, threat, 6.0, kScreenStepS, policy)
                 .breach) {
          throw UnidentifiableConfiguration(
              "control experiment: constructed encounter predicts no breach");
        }
      }

      // Brake to a stop along the path, the intruder closing meanwhile.
      const double brake_time = config.dynamics.braking_response_s +
                                cruise / config.dynamics.max_accel_mps2;
      const double brake_dist =
          cruise * config.dynamics.braking_response_s +
          cruise * cruise / (2.0 * config.dynamics.max_accel_mps2);
      Vec3 stop = point_at_arc(path, total_arc / 2.0 - back + brake_dist)
                      .position;
      Obstacle at_stop = intruder;
      at_stop.sphere.center =
          intruder.sphere.center + intruder.velocity * brake_time;

      Environment3d updated;
      updated.bounds = config.bounds;
      updated.obstacles.push_back(at_stop);
      while (!point_clear(updated, stop)) {
        back += 5.0;
        if (back > total_arc) {
          throw UnidentifiableConfiguration(
              "control experiment: no clear stopping point on the path");
        }
        stop = point_at_arc(path, total_arc / 2.0 - back + brake_dist)
                   .position;
      }

      struct Arm {
        const char* name;
        PlanTree tree;
        double delay_s = 0.0;
        std::size_t expansions = 0;
      };
      Arm arms[2];

      const std::uint64_t reuse_seed = derive_seed({cell_seed, 2});
      const std::uint64_t scratch_seed = derive_seed({cell_seed, 3});
      const int repeats = config.timing_exclusive ? 3 : 1;

      arms[0].name = "reuse";
      for (int rep = 0; rep < repeats; ++rep) {
        ReplanResult repaired = replan_with_reuse(tree, updated, stop, goal,
                                                  regrow, reuse_seed);
        if (rep == 0) {
          arms[0].tree = std::move(repaired.tree);
          arms[0].expansions = repaired.expansions;
          arms[0].delay_s = repaired.delay_s;
        } else {
          arms[0].delay_s = std::min(arms[0].delay_s, repaired.delay_s);
        }
      }

      arms[1].name = "scratch";
      for (int rep = 0; rep < repeats; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        PlanTree fresh =
            rrt_star(updated, stop, goal, config.plan, scratch_seed);
        const double elapsed = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count();
        if (rep == 0) {
          arms[1].expansions = fresh.nodes.size() - 1;
          arms[1].tree = std::move(fresh);
          arms[1].delay_s = elapsed;
        } else {
          arms[1].delay_s = std::min(arms[1].delay_s, elapsed);
        }
      }

      for (Arm& arm : arms) {
        ControlTrialRow row;
        row.planner = arm.name;
        row.obstacle_radius_m = radius;
        row.trial = trial;
        row.replanning_delay_ms = arm.delay_s * 1e3;
        row.expansions = arm.expansions;
        const std::vector<Vec3> repaired_path = goal_path_points(arm.tree);
        if (repaired_path.size() >= 2) {
          row.path_length_m = path_length(repaired_path);
          row.energy_j = path_energy_j(repaired_path, cruise, config.power);
        } else {
          row.path_length_m = std::numeric_limits<double>::quiet_NaN();
          row.energy_j = std::numeric_limits<double>::quiet_NaN();
        }

        FlightParams fp;
        fp.truth = updated;
        fp.start = stop;
        fp.goal = goal;
        fp.dynamics = config.dynamics;
        fp.sensing_std = config.sensing_std_m;
        fp.avoidance = true;
        fp.replan = regrow;
        fp.seed = derive_seed({cell_seed, 4});
        row.collided = simulate_flight(fp, arm.tree, rng).collided;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void CollisionStudyConfig::validate() const {
  env.validate();
  dynamics.validate();
  plan.validate();
  if (trials == 0) {
    throw InvalidInput("collision study: need at least one trial");
  }
  if (sensing_std_m < 0.0 || obstacle_speed_mps < 0.0) {
    throw InvalidInput("collision study: negative speed or noise");
  }
  if (!env.contains(start) || !env.contains(goal)) {
    throw InvalidInput("collision study: endpoints out of bounds");
  }
}

CollisionEstimate collision_probability(const CollisionStudyConfig& config) {
  config.validate();

  CollisionEstimate estimate;
  estimate.trials = config.trials;

  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t trial_seed =
        derive_seed({config.seed, kCollisionTag, trial});
    Rng rng(trial_seed);

    Environment3d layout = config.env;
    PlanTree tree;
    if (config.randomize_layout) {
      bool planned = false;
      for (std::uint64_t attempt = 0; attempt < 20 && !planned; ++attempt) {
        layout.obstacles.clear();
        bool placed_all = true;
        for (const Obstacle& proto : config.env.obstacles) {
          const EquivalentSphere shape = equivalent_sphere(
              Vec3{}, proto.sphere.physical_radius_m, config.sensing_std_m);
          Obstacle fresh;
          fresh.sphere = shape;
          bool placed = false;
          for (int tries = 0; tries < 200 && !placed; ++tries) {
            const Vec3 c{rng.uniform(0.0, layout.bounds.x),
                         rng.uniform(0.0, layout.bounds.y),
                         rng.uniform(0.0, layout.bounds.z)};
            if (distance(c, config.start) >
                    shape.equivalent_radius_m + 8.0 &&
                distance(c, config.goal) >
                    shape.equivalent_radius_m + config.plan.goal_radius_m +
                        8.0) {
              fresh.sphere.center = c;
              placed = true;
            }
          }
          if (!placed) {
            placed_all = false;
            break;
          }
          Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
          fresh.velocity =
              unit_or(dir, Vec3{1.0, 0.0, 0.0}) * config.obstacle_speed_mps;
          layout.obstacles.push_back(fresh);
        }
        if (!placed_all) {
          continue;
        }
        tree = rrt_star(layout, config.start, config.goal, config.plan,
                        derive_seed({trial_seed, attempt, 1}));
        planned = !tree.goal_path.empty();
      }
      if (!planned) {
        throw UnidentifiableConfiguration(
            "collision study: could not place a plannable layout");
      }
    } else {
      tree = rrt_star(layout, config.start, config.goal, config.plan,
                      derive_seed({trial_seed, 1}));
      if (tree.goal_path.empty()) {
        throw UnidentifiableConfiguration(
            "collision study: no initial path in the given layout");
      }
    }

    FlightParams fp;
    fp.truth = layout;
    fp.start = config.start;
    fp.goal = config.goal;
    fp.dynamics = config.dynamics;
    fp.sensing_std = config.sensing_std_m;
    fp.avoidance = config.avoidance_enabled;
    fp.replan = config.plan;
    fp.seed = derive_seed({trial_seed, 2});
    if (simulate_flight(fp, std::move(tree), rng).collided) {
      ++estimate.collisions;
    }
  }

  const double n = static_cast<double>(estimate.trials);
  const double p = static_cast<double>(estimate.collisions) / n;
  estimate.probability = p;
  // Wilson score interval, z for 95%.
  const double z = 1.959963984540054;
  const double z2 = z * z;
  const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z *
                      std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) /
                      (1.0 + z2 / n);
  estimate.ci_low = std::max(0.0, center - half);
  estimate.ci_high = std::min(1.0, center + half);
  return estimate;
}

}  // namespace iscc::control
