#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "iscc/common/geometry.hpp"
#include "iscc/control/tracking.hpp"

namespace iscc::control {

/// One sensed object the planner must clear: its equivalent sphere plus the
/// velocity it was last seen moving with. Planning treats the sphere as a
/// static snapshot; the velocity is carried for the simulators that move
/// obstacles between planning episodes.
struct Obstacle {
  EquivalentSphere sphere;
  Vec3 velocity;
};

/// Axis-aligned flight volume anchored at the origin, with the obstacles
/// currently known inside it. Obstacle centers must lie inside the bounds
/// and radii must be positive (equivalent >= physical).
struct Environment3d {
  Vec3 bounds{300.0, 300.0, 100.0};
  std::vector<Obstacle> obstacles;

  void validate() const;
  bool contains(const Vec3& point) const;
};

/// True when `point` lies inside no obstacle's equivalent sphere (and inside
/// the bounds).
bool point_clear(const Environment3d& env, const Vec3& point);

/// True when the whole segment from `a` to `b` stays inside the bounds and
/// clears every obstacle's equivalent sphere. Exact segment-to-center
/// distance, not sampling.
bool segment_clear(const Environment3d& env, const Vec3& a, const Vec3& b);

constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

/// One vertex of a plan tree. The root has `parent == kNoParent` and zero
/// cost; every other node's cost_to_come is its parent's plus the straight
/// edge between them.
struct PlanNode {
  Vec3 position;
  std::size_t parent = kNoParent;
  double cost_to_come = 0.0;
};

/// Search tree rooted at the vehicle position. `goal_path` is the chain of
/// node indices from the root to a node inside the goal region, root first;
/// it stays empty when the tree has not reached the goal.
struct PlanTree {
  std::vector<PlanNode> nodes;
  std::vector<std::size_t> goal_path;
};

/// Tuning knobs shared by initial planning and replanning.
struct RrtParams {
  std::size_t iterations = 1000;
  double step_m = 5.0;
  double goal_radius_m = 5.0;
  /// Rewiring neighborhoods shrink as gamma * (log n / n)^(1/3). The default
  /// is sized for the experiment volume; anything comfortably above the
  /// theoretical minimum for the free space works.
  double rewire_gamma = 300.0;
  /// Fraction of sampling rounds that aim straight at the goal instead of a
  /// uniform point. Without it a few-meter goal region in a box of millions
  /// of cubic meters is a lottery ticket at any sane iteration budget.
  double goal_bias = 0.1;

  void validate() const;
};

/// Grows an optimizing rapidly exploring random tree from `start` and
/// returns it, goal_path filled when some node landed within
/// `goal_radius_m` of `goal` (the lowest-cost such node wins). Samples
/// uniformly over the bounds (goal-biased every so often), extends by at
/// most step_m, connects through the cheapest collision-free neighbor
/// inside the shrinking rewiring radius, and rewires that neighborhood
/// through the new node when it pays. Not reaching the goal within the
/// iteration budget is a valid outcome, not an error. Throws InvalidInput
/// when the start or goal violates the environment (outside bounds or
/// inside an obstacle).
PlanTree rrt_star(const Environment3d& env, const Vec3& start,
                  const Vec3& goal, const RrtParams& params,
                  std::uint64_t seed);

/// Outcome of a replanning episode. `delay_s` is the wall-clock cost of the
/// whole episode on the monotonic clock; `expansions` counts nodes added
/// while regrowing (zero when the pruned tree still reached the goal).
struct ReplanResult {
  PlanTree tree;
  double delay_s = 0.0;
  std::size_t expansions = 0;
  bool success = false;
};

/// Repairs `tree` against an updated environment instead of planning from
/// scratch: prunes every node whose connecting edge is no longer clear
/// (with its subtree), re-roots the survivor nearest `current_position`,
/// recomputes costs, and regrows with the usual sampling until a goal path
/// exists or `params.iterations` expansions were spent. An update that
/// invalidates nothing and a current position at the old root return the
/// prior goal path unchanged. Failure to reach the goal within the budget
/// is flagged (`success == false`) and the partial tree returned.
ReplanResult replan_with_reuse(const PlanTree& tree,
                               const Environment3d& env_updated,
                               const Vec3& current_position, const Vec3& goal,
                               const RrtParams& params, std::uint64_t seed);

/// Positions along the tree's goal path, root first. Empty when the tree
/// has no goal path.
std::vector<Vec3> goal_path_points(const PlanTree& tree);

/// Total length of a polyline. Zero for fewer than two points.
double path_length(const std::vector<Vec3>& points);

}  // namespace iscc::control
