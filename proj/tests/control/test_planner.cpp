#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "iscc/common/errors.hpp"
#include "iscc/common/rng.hpp"
#include "iscc/control/planner.hpp"

using namespace iscc;
using namespace iscc::control;

namespace {

Obstacle sphere_at(const Vec3& center, double radius) {
  Obstacle o;
  o.sphere.center = center;
  o.sphere.physical_radius_m = radius;
  o.sphere.equivalent_radius_m = radius;
  return o;
}

/// Free-space oracle: walks a polyline in 5 cm steps and checks every sample
/// against bounds and obstacle spheres with raw arithmetic, independently of
/// the library's exact segment test.
bool dense_clear(const Environment3d& env, const std::vector<Vec3>& points,
                 double slack = 0.0) {
  if (points.empty()) {
    return false;
  }
  for (std::size_t i = 0; i + 1 <= points.size(); ++i) {
    const Vec3 a = points[i];
    const Vec3 b = points[std::min(i + 1, points.size() - 1)];
    const double len = distance(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.05)));
    for (int s = 0; s <= steps; ++s) {
      const double u = static_cast<double>(s) / steps;
      const Vec3 p = a + (b - a) * u;
      if (p.x < 0.0 || p.x > env.bounds.x || p.y < 0.0 || p.y > env.bounds.y ||
          p.z < 0.0 || p.z > env.bounds.z) {
        return false;
      }
      for (const Obstacle& o : env.obstacles) {
        if (distance(p, o.sphere.center) <
            o.sphere.equivalent_radius_m - slack) {
          return false;
        }
      }
    }
  }
  return true;
}

/// Structural audit of a tree: single root, valid acyclic parents, costs
/// consistent with edge lengths, every edge inside free space, and a goal
/// path that really is a root-to-goal chain.
void audit_tree(const PlanTree& tree, const Environment3d& env,
                const Vec3& goal, const RrtParams& params) {
  REQUIRE_FALSE(tree.nodes.empty());

  std::size_t roots = 0;
  for (const PlanNode& n : tree.nodes) {
    if (n.parent == kNoParent) {
      ++roots;
      CHECK(n.cost_to_come == doctest::Approx(0.0));
    } else {
      REQUIRE(n.parent < tree.nodes.size());
    }
  }
  CHECK(roots == 1);

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    // Walk to the root; more hops than nodes means a cycle.
    std::size_t cursor = i;
    std::size_t hops = 0;
    while (tree.nodes[cursor].parent != kNoParent) {
      cursor = tree.nodes[cursor].parent;
      REQUIRE(++hops <= tree.nodes.size());
    }

    const PlanNode& n = tree.nodes[i];
    if (n.parent != kNoParent) {
      const PlanNode& p = tree.nodes[n.parent];
      const double edge = distance(n.position, p.position);
      CHECK(std::abs(n.cost_to_come - p.cost_to_come - edge) <=
            1e-9 * (1.0 + n.cost_to_come));
      CHECK(dense_clear(env, {p.position, n.position}, 1e-9));
    }
  }

  if (!tree.goal_path.empty()) {
    REQUIRE(tree.goal_path.front() < tree.nodes.size());
    CHECK(tree.nodes[tree.goal_path.front()].parent == kNoParent);
    for (std::size_t k = 0; k + 1 < tree.goal_path.size(); ++k) {
      REQUIRE(tree.goal_path[k + 1] < tree.nodes.size());
      CHECK(tree.nodes[tree.goal_path[k + 1]].parent == tree.goal_path[k]);
    }
    CHECK(distance(tree.nodes[tree.goal_path.back()].position, goal) <=
          params.goal_radius_m);
  }
}

}  // namespace

TEST_CASE("environment validation and containment") {
  Environment3d env;
  CHECK_NOTHROW(env.validate());
  CHECK(env.contains({150.0, 150.0, 50.0}));
  CHECK(env.contains({0.0, 0.0, 0.0}));
  CHECK_FALSE(env.contains({-0.1, 10.0, 10.0}));
  CHECK_FALSE(env.contains({10.0, 10.0, 100.1}));

  Environment3d flat;
  flat.bounds = {300.0, 300.0, 0.0};
  CHECK_THROWS_AS(flat.validate(), InvalidInput);

  Environment3d bad_radius;
  bad_radius.obstacles.push_back(sphere_at({50.0, 50.0, 50.0}, 10.0));
  bad_radius.obstacles.back().sphere.physical_radius_m = 0.0;
  bad_radius.obstacles.back().sphere.equivalent_radius_m = 0.0;
  CHECK_THROWS_AS(bad_radius.validate(), InvalidInput);

  Environment3d shrunk;
  shrunk.obstacles.push_back(sphere_at({50.0, 50.0, 50.0}, 10.0));
  shrunk.obstacles.back().sphere.equivalent_radius_m = 9.0;
  CHECK_THROWS_AS(shrunk.validate(), InvalidInput);

  Environment3d outside;
  outside.obstacles.push_back(sphere_at({350.0, 50.0, 50.0}, 10.0));
  CHECK_THROWS_AS(outside.validate(), InvalidInput);
}

TEST_CASE("point and segment clearance against hand geometry") {
  Environment3d env;
  env.obstacles.push_back(sphere_at({50.0, 50.0, 50.0}, 10.0));

  CHECK_FALSE(point_clear(env, {50.0, 50.0, 50.0}));
  CHECK_FALSE(point_clear(env, {59.0, 50.0, 50.0}));
  CHECK_FALSE(point_clear(env, {60.0, 50.0, 50.0}));  // boundary is occupied
  CHECK(point_clear(env, {60.5, 50.0, 50.0}));
  CHECK_FALSE(point_clear(env, {-1.0, 50.0, 50.0}));

  // Straight through the centre.
  CHECK_FALSE(segment_clear(env, {30.0, 50.0, 50.0}, {70.0, 50.0, 50.0}));
  // Grazing pass half a metre outside the sphere.
  CHECK(segment_clear(env, {30.0, 60.5, 50.0}, {70.0, 60.5, 50.0}));
  // One endpoint buried.
  CHECK_FALSE(segment_clear(env, {50.0, 50.0, 50.0}, {90.0, 50.0, 50.0}));
  // Out of bounds endpoint.
  CHECK_FALSE(segment_clear(env, {-5.0, 60.5, 50.0}, {70.0, 60.5, 50.0}));
}

TEST_CASE("segment clearance agrees with dense sampling") {
  Rng rng(314);
  Environment3d env;
  for (int i = 0; i < 3; ++i) {
    env.obstacles.push_back(
        sphere_at({rng.uniform(40.0, 260.0), rng.uniform(40.0, 260.0),
                   rng.uniform(20.0, 80.0)},
                  rng.uniform(8.0, 25.0)));
  }
  env.validate();

  for (int round = 0; round < 300; ++round) {
    const Vec3 a{rng.uniform(1.0, 299.0), rng.uniform(1.0, 299.0),
                 rng.uniform(1.0, 99.0)};
    Vec3 b = a + Vec3{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0),
                      rng.uniform(-15.0, 15.0)};
    b.x = std::clamp(b.x, 0.0, 300.0);
    b.y = std::clamp(b.y, 0.0, 300.0);
    b.z = std::clamp(b.z, 0.0, 100.0);

    if (segment_clear(env, a, b)) {
      // A clear segment may not contain any sample strictly inside a sphere.
      CHECK(dense_clear(env, {a, b}, 0.01));
    } else if (point_clear(env, a) && point_clear(env, b)) {
      // A blocked segment with free endpoints must dip into some sphere;
      // give the sampled oracle a small tolerance around tangency.
      CHECK_FALSE(dense_clear(env, {a, b}, -0.01));
    }
  }
}

TEST_CASE("planning rejects occupied or out-of-bounds endpoints") {
  Environment3d env;
  env.obstacles.push_back(sphere_at({150.0, 150.0, 50.0}, 30.0));
  const RrtParams params;

  CHECK_THROWS_AS(
      rrt_star(env, {150.0, 150.0, 50.0}, {280.0, 280.0, 80.0}, params, 1),
      InvalidInput);
  CHECK_THROWS_AS(
      rrt_star(env, {20.0, 20.0, 20.0}, {150.0, 160.0, 50.0}, params, 1),
      InvalidInput);
  CHECK_THROWS_AS(
      rrt_star(env, {20.0, 20.0, 20.0}, {310.0, 20.0, 20.0}, params, 1),
      InvalidInput);

  RrtParams bad = params;
  bad.step_m = 0.0;
  CHECK_THROWS_AS(rrt_star(env, {20.0, 20.0, 20.0}, {280.0, 280.0, 80.0}, bad,
                           1),
                  InvalidInput);
  bad = params;
  bad.goal_bias = 1.0;
  CHECK_THROWS_AS(rrt_star(env, {20.0, 20.0, 20.0}, {280.0, 280.0, 80.0}, bad,
                           1),
                  InvalidInput);
}

TEST_CASE("open arena paths stay near the straight line") {
  Environment3d env;
  const Vec3 start{20.0, 20.0, 20.0};
  const Vec3 goal{280.0, 280.0, 80.0};
  const double straight = distance(start, goal);
  const RrtParams params;

  std::vector<double> stretches;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const PlanTree tree = rrt_star(env, start, goal, params, seed);
    audit_tree(tree, env, goal, params);
    REQUIRE_FALSE(tree.goal_path.empty());

    const std::vector<Vec3> points = goal_path_points(tree);
    CHECK(points.front() == start);
    CHECK(distance(points.back(), goal) <= params.goal_radius_m);
    CHECK(dense_clear(env, points, 1e-9));
    stretches.push_back(path_length(points) / straight);
  }

  std::nth_element(stretches.begin(), stretches.begin() + 25, stretches.end());
  CHECK(stretches[25] <= 1.3);
}

TEST_CASE("a blocking sphere forces a detour, never a crossing") {
  Environment3d env;
  env.obstacles.push_back(sphere_at({150.0, 150.0, 50.0}, 40.0));
  const Vec3 start{20.0, 150.0, 50.0};
  const Vec3 goal{280.0, 150.0, 50.0};
  const RrtParams params;

  int found = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const PlanTree tree = rrt_star(env, start, goal, params, seed);
    audit_tree(tree, env, goal, params);
    if (tree.goal_path.empty()) {
      continue;
    }
    ++found;
    const std::vector<Vec3> points = goal_path_points(tree);
    CHECK(dense_clear(env, points, 1e-9));
    CHECK(path_length(points) > 261.0);
  }
  CHECK(found >= 48);
}

TEST_CASE("an exhausted budget returns a tree without a goal path") {
  Environment3d env;
  RrtParams tiny;
  tiny.iterations = 3;
  const PlanTree tree =
      rrt_star(env, {20.0, 20.0, 20.0}, {280.0, 280.0, 80.0}, tiny, 5);
  CHECK(tree.goal_path.empty());
  CHECK(goal_path_points(tree).empty());
  CHECK(tree.nodes.size() >= 1);
  audit_tree(tree, env, {280.0, 280.0, 80.0}, tiny);
}

TEST_CASE("planning is deterministic in the seed") {
  Environment3d env;
  env.obstacles.push_back(sphere_at({150.0, 150.0, 50.0}, 30.0));
  const Vec3 start{20.0, 20.0, 50.0};
  const Vec3 goal{280.0, 280.0, 50.0};
  const RrtParams params;

  const PlanTree a = rrt_star(env, start, goal, params, 42);
  const PlanTree b = rrt_star(env, start, goal, params, 42);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].position == b.nodes[i].position);
    CHECK(a.nodes[i].parent == b.nodes[i].parent);
    CHECK(a.nodes[i].cost_to_come == b.nodes[i].cost_to_come);
  }
  CHECK(a.goal_path == b.goal_path);

  const PlanTree c = rrt_star(env, start, goal, params, 43);
  bool differs = c.nodes.size() != a.nodes.size();
  for (std::size_t i = 1; !differs && i < a.nodes.size(); ++i) {
    differs = !(a.nodes[i].position == c.nodes[i].position);
  }
  CHECK(differs);
}

TEST_CASE("aggressive rewiring keeps the tree consistent") {
  Environment3d env;
  env.obstacles.push_back(sphere_at({100.0, 150.0, 50.0}, 25.0));
  env.obstacles.push_back(sphere_at({200.0, 150.0, 50.0}, 25.0));
  RrtParams params;
  params.rewire_gamma = 600.0;
  const Vec3 goal{280.0, 150.0, 50.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PlanTree tree = rrt_star(env, {20.0, 150.0, 50.0}, goal, params, seed);
    audit_tree(tree, env, goal, params);
  }
}

TEST_CASE("replanning in an unchanged world is a cheap no-op") {
  Environment3d env;
  env.obstacles.push_back(sphere_at({150.0, 60.0, 50.0}, 25.0));
  const Vec3 start{20.0, 150.0, 50.0};
  const Vec3 goal{280.0, 150.0, 50.0};
  const RrtParams params;
  const PlanTree tree = rrt_star(env, start, goal, params, 9);
  REQUIRE_FALSE(tree.goal_path.empty());

  const ReplanResult result =
      replan_with_reuse(tree, env, start, goal, params, 77);
  CHECK(result.success);
  CHECK(result.expansions == 0);
  CHECK(result.delay_s >= 0.0);
  CHECK(result.tree.nodes.size() == tree.nodes.size());
  CHECK(goal_path_points(result.tree) == goal_path_points(tree));
}

TEST_CASE("replanning repairs the path around a new obstacle") {
  Environment3d env;
  const Vec3 start{20.0, 150.0, 50.0};
  const Vec3 goal{280.0, 150.0, 50.0};
  const RrtParams params;
  const PlanTree tree = rrt_star(env, start, goal, params, 15);
  REQUIRE_FALSE(tree.goal_path.empty());
  const std::vector<Vec3> before = goal_path_points(tree);

  Environment3d env2 = env;
  env2.obstacles.push_back(sphere_at({150.0, 150.0, 50.0}, 30.0));

  const ReplanResult result =
      replan_with_reuse(tree, env2, start, goal, params, 16);
  REQUIRE(result.success);
  CHECK(result.expansions > 0);
  audit_tree(result.tree, env2, goal, params);

  const std::vector<Vec3> after = goal_path_points(result.tree);
  CHECK(dense_clear(env2, after, 1e-9));
  CHECK(after != before);
  CHECK(path_length(after) > 261.0);
}

TEST_CASE("replanning can start from a point along the old path") {
  Environment3d env;
  const Vec3 start{20.0, 150.0, 50.0};
  const Vec3 goal{280.0, 150.0, 50.0};
  const RrtParams params;
  const PlanTree tree = rrt_star(env, start, goal, params, 21);
  REQUIRE_FALSE(tree.goal_path.empty());
  const std::vector<Vec3> points = goal_path_points(tree);
  const Vec3 current = points[points.size() / 4];

  Environment3d env2 = env;
  env2.obstacles.push_back(sphere_at({170.0, 150.0, 50.0}, 25.0));
  REQUIRE(point_clear(env2, current));

  const ReplanResult result =
      replan_with_reuse(tree, env2, current, goal, params, 22);
  REQUIRE(result.success);
  audit_tree(result.tree, env2, goal, params);

  const std::vector<Vec3> after = goal_path_points(result.tree);
  REQUIRE_FALSE(after.empty());
  CHECK(distance(after.front(), current) < 1e-6);
  CHECK(dense_clear(env2, after, 1e-9));
}

TEST_CASE("a zero regrow budget reports failure with a partial tree") {
  Environment3d env;
  const Vec3 start{20.0, 150.0, 50.0};
  const Vec3 goal{280.0, 150.0, 50.0};
  const RrtParams params;
  const PlanTree tree = rrt_star(env, start, goal, params, 31);
  REQUIRE_FALSE(tree.goal_path.empty());

  Environment3d env2 = env;
  env2.obstacles.push_back(sphere_at({150.0, 150.0, 50.0}, 30.0));
  RrtParams frozen = params;
  frozen.iterations = 0;

  const ReplanResult result =
      replan_with_reuse(tree, env2, start, goal, frozen, 32);
  CHECK_FALSE(result.success);
  CHECK(result.expansions == 0);
  CHECK_FALSE(result.tree.nodes.empty());
  CHECK(result.tree.goal_path.empty());
  CHECK(result.delay_s >= 0.0);
}

TEST_CASE("replanning validates its inputs") {
  Environment3d env;
  const RrtParams params;
  const PlanTree tree = rrt_star(env, {20.0, 150.0, 50.0},
                                 {280.0, 150.0, 50.0}, params, 3);

  CHECK_THROWS_AS(replan_with_reuse(PlanTree{}, env, {20.0, 150.0, 50.0},
                                    {280.0, 150.0, 50.0}, params, 1),
                  InvalidInput);

  Environment3d env2 = env;
  env2.obstacles.push_back(sphere_at({20.0, 150.0, 50.0}, 10.0));
  CHECK_THROWS_AS(replan_with_reuse(tree, env2, {20.0, 150.0, 50.0},
                                    {280.0, 150.0, 50.0}, params, 1),
                  InvalidInput);

  Environment3d env3 = env;
  env3.obstacles.push_back(sphere_at({280.0, 150.0, 50.0}, 10.0));
  CHECK_THROWS_AS(replan_with_reuse(tree, env3, {20.0, 150.0, 50.0},
                                    {280.0, 150.0, 50.0}, params, 1),
                  InvalidInput);
}

TEST_CASE("path length sums segment distances") {
  CHECK(path_length({}) == doctest::Approx(0.0));
  CHECK(path_length({{1.0, 2.0, 3.0}}) == doctest::Approx(0.0));
  CHECK(path_length({{0.0, 0.0, 0.0}, {3.0, 4.0, 0.0}, {3.0, 4.0, 10.0}}) ==
        doctest::Approx(15.0));
}
