#include "iscc/control/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "iscc/common/errors.hpp"
#include "iscc/common/rng.hpp"

namespace iscc::control {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) {
    return distance(a, p);
  }
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(a + ab * t, p);
}

/// Mutable tree with child lists, so rewiring can push cost changes down
/// whole subtrees.
struct Builder {
  std::vector<PlanNode> nodes;
  std::vector<std::vector<std::size_t>> children;

  std::size_t add(const Vec3& position, std::size_t parent, double cost) {
    nodes.push_back({position, parent, cost});
    children.emplace_back();
    if (parent != kNoParent) {
      children[parent].push_back(nodes.size() - 1);
    }
    return nodes.size() - 1;
  }

  void reparent(std::size_t child, std::size_t parent, double cost) {
    auto& siblings = children[nodes[child].parent];
    siblings.erase(std::find(siblings.begin(), siblings.end(), child));
    nodes[child].parent = parent;
    children[parent].push_back(child);

    const double delta = cost - nodes[child].cost_to_come;
    std::vector<std::size_t> stack{child};
    while (!stack.empty()) {
      const std::size_t at = stack.back();
      stack.pop_back();
      nodes[at].cost_to_come += delta;
      stack.insert(stack.end(), children[at].begin(), children[at].end());
    }
  }
};

double rewire_radius(const RrtParams& params, std::size_t n) {
  if (params.rewire_gamma <= 0.0 || n < 2) {
    return 0.0;
  }
  const double nn = static_cast<double>(n);
  return params.rewire_gamma * std::cbrt(std::log(nn) / nn);
}

/// One sampling round: returns the index of the inserted node, or kNoParent
/// when the sample was rejected.
std::size_t extend(const Environment3d& env, const RrtParams& params,
                   const Vec3& goal, Rng& rng, Builder& tree) {
  Vec3 sample = goal;
  if (rng.uniform(0.0, 1.0) >= params.goal_bias) {
    sample = {rng.uniform(0.0, env.bounds.x), rng.uniform(0.0, env.bounds.y),
              rng.uniform(0.0, env.bounds.z)};
  }

  std::size_t nearest = kNoParent;
  double nearest_d = kInf;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const double d = distance(tree.nodes[i].position, sample);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  if (nearest_d <= 1e-12) {
    return kNoParent;
  }

  const Vec3 towards = (sample - tree.nodes[nearest].position) *
                       (std::min(params.step_m, nearest_d) / nearest_d);
  const Vec3 fresh = tree.nodes[nearest].position + towards;
  if (!point_clear(env, fresh)) {
    return kNoParent;
  }

  const double radius = rewire_radius(params, tree.nodes.size());
  std::vector<std::size_t> neighbors;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (distance(tree.nodes[i].position, fresh) <= radius) {
      neighbors.push_back(i);
    }
  }

  std::size_t parent = kNoParent;
  double best_cost = kInf;
  auto consider = [&](std::size_t i) {
    const double cost =
        tree.nodes[i].cost_to_come + distance(tree.nodes[i].position, fresh);
    if (cost < best_cost && segment_clear(env, tree.nodes[i].position, fresh)) {
      best_cost = cost;
      parent = i;
    }
  };
  for (const std::size_t i : neighbors) {
    consider(i);
  }
  if (std::find(neighbors.begin(), neighbors.end(), nearest) ==
      neighbors.end()) {
    consider(nearest);
  }
  if (parent == kNoParent) {
    return kNoParent;
  }

  const std::size_t added = tree.add(fresh, parent, best_cost);
  for (const std::size_t i : neighbors) {
    if (i == parent) {
      continue;
    }
    const double through =
        best_cost + distance(fresh, tree.nodes[i].position);
    if (through + 1e-12 < tree.nodes[i].cost_to_come &&
        segment_clear(env, fresh, tree.nodes[i].position)) {
      tree.reparent(i, added, through);
    }
  }
  return added;
}

std::vector<std::size_t> chain_to_root(const std::vector<PlanNode>& nodes,
                                       std::size_t leaf) {
  std::vector<std::size_t> path;
  for (std::size_t at = leaf; at != kNoParent; at = nodes[at].parent) {
    path.push_back(at);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

/// Lowest-cost node inside the goal region, or kNoParent.
std::size_t best_goal_node(const std::vector<PlanNode>& nodes,
                           const Vec3& goal, double goal_radius) {
  std::size_t best = kNoParent;
  double best_cost = kInf;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (distance(nodes[i].position, goal) <= goal_radius &&
        nodes[i].cost_to_come < best_cost) {
      best_cost = nodes[i].cost_to_come;
      best = i;
    }
  }
  return best;
}

}  // namespace

void Environment3d::validate() const {
  if (!(bounds.x > 0.0) || !(bounds.y > 0.0) || !(bounds.z > 0.0)) {
    throw InvalidInput("Environment3d: bounds must be positive");
  }
  for (const Obstacle& obstacle : obstacles) {
    if (!(obstacle.sphere.physical_radius_m > 0.0)) {
      throw InvalidInput("Environment3d: obstacle radius must be positive");
    }
    if (obstacle.sphere.equivalent_radius_m <
        obstacle.sphere.physical_radius_m) {
      throw InvalidInput(
          "Environment3d: equivalent radius below physical radius");
    }
    if (!contains(obstacle.sphere.center)) {
      throw InvalidInput("Environment3d: obstacle center out of bounds");
    }
  }
}

bool Environment3d::contains(const Vec3& point) const {
  return point.x >= 0.0 && point.x <= bounds.x && point.y >= 0.0 &&
         point.y <= bounds.y && point.z >= 0.0 && point.z <= bounds.z;
}

bool point_clear(const Environment3d& env, const Vec3& point) {
  if (!env.contains(point)) {
    return false;
  }
  for (const Obstacle& obstacle : env.obstacles) {
    if (distance(point, obstacle.sphere.center) <=
        obstacle.sphere.equivalent_radius_m) {
      return false;
    }
  }
  return true;
}

bool segment_clear(const Environment3d& env, const Vec3& a, const Vec3& b) {
  if (!env.contains(a) || !env.contains(b)) {
    return false;
  }
  for (const Obstacle& obstacle : env.obstacles) {
    if (segment_point_distance(a, b, obstacle.sphere.center) <=
        obstacle.sphere.equivalent_radius_m) {
      return false;
    }
  }
  return true;
}

void RrtParams::validate() const {
  if (!(step_m > 0.0) || !(goal_radius_m > 0.0) || rewire_gamma < 0.0 ||
      goal_bias < 0.0 || goal_bias >= 1.0) {
    throw InvalidInput("RrtParams: bad step, goal radius, gamma, or bias");
  }
}

PlanTree rrt_star(const Environment3d& env, const Vec3& start,
                  const Vec3& goal, const RrtParams& params,
                  std::uint64_t seed) {
  env.validate();
  params.validate();
  if (!point_clear(env, start)) {
    throw InvalidInput("rrt_star: start is not in free space");
  }
  if (!point_clear(env, goal)) {
    throw InvalidInput("rrt_star: goal is not in free space");
  }

  Builder tree;
  tree.add(start, kNoParent, 0.0);
  Rng rng(seed);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    extend(env, params, goal, rng, tree);
  }

  PlanTree out;
  out.nodes = std::move(tree.nodes);
  const std::size_t reached =
      best_goal_node(out.nodes, goal, params.goal_radius_m);
  if (reached != kNoParent) {
    out.goal_path = chain_to_root(out.nodes, reached);
  }
  return out;
}

ReplanResult replan_with_reuse(const PlanTree& tree,
                               const Environment3d& env_updated,
                               const Vec3& current_position, const Vec3& goal,
                               const RrtParams& params, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  env_updated.validate();
  params.validate();
  if (tree.nodes.empty()) {
    throw InvalidInput("replan_with_reuse: empty tree");
  }
  if (!point_clear(env_updated, current_position)) {
    throw InvalidInput("replan_with_reuse: current position is not clear");
  }
  if (!point_clear(env_updated, goal)) {
    throw InvalidInput("replan_with_reuse: goal is not in free space");
  }

  std::size_t old_root = kNoParent;
  std::vector<std::vector<std::size_t>> kids(tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].parent == kNoParent) {
      if (old_root != kNoParent) {
        throw InvalidInput("replan_with_reuse: tree has several roots");
      }
      old_root = i;
    } else {
      kids[tree.nodes[i].parent].push_back(i);
    }
  }
  if (old_root == kNoParent) {
    throw InvalidInput("replan_with_reuse: tree has no root");
  }

  // Prune: keep the root if it still stands in free space, then every node
  // whose edge from a kept parent stays clear. Dropping an edge drops the
  // subtree hanging off it.
  std::vector<std::size_t> remap(tree.nodes.size(), kNoParent);
  Builder rebuilt;
  if (point_clear(env_updated, tree.nodes[old_root].position)) {
    std::vector<std::size_t> stack{old_root};
    remap[old_root] = rebuilt.add(tree.nodes[old_root].position, kNoParent, 0.0);
    while (!stack.empty()) {
      const std::size_t at = stack.back();
      stack.pop_back();
      for (const std::size_t child : kids[at]) {
        if (!segment_clear(env_updated, tree.nodes[at].position,
                           tree.nodes[child].position)) {
          continue;
        }
        remap[child] = rebuilt.add(tree.nodes[child].position, remap[at], 0.0);
        stack.push_back(child);
      }
    }
  }

  // Re-root the survivors at the node nearest the vehicle; when the vehicle
  // has strayed off the tree, splice its actual position in as the new root
  // through the nearest survivor it can see.
  if (rebuilt.nodes.empty()) {
    rebuilt.add(current_position, kNoParent, 0.0);
  } else {
    std::size_t anchor = kNoParent;
    double anchor_d = kInf;
    for (std::size_t i = 0; i < rebuilt.nodes.size(); ++i) {
      const double d = distance(rebuilt.nodes[i].position, current_position);
      if (d < anchor_d &&
          (d <= 1e-9 || segment_clear(env_updated, current_position,
                                      rebuilt.nodes[i].position))) {
        anchor_d = d;
        anchor = i;
      }
    }
    if (anchor == kNoParent) {
      // Survivors exist but none is reachable in a straight line; restart
      // from the vehicle and let the regrow phase reconnect.
      rebuilt = Builder{};
      rebuilt.add(current_position, kNoParent, 0.0);
    } else {
      // Reverse the parent chain above the anchor so it becomes the root.
      std::size_t at = anchor;
      std::size_t previous = kNoParent;
      while (at != kNoParent) {
        const std::size_t up = rebuilt.nodes[at].parent;
        rebuilt.nodes[at].parent = previous;
        previous = at;
        at = up;
      }
      if (anchor_d > 1e-9) {
        const std::size_t fresh =
            rebuilt.add(current_position, kNoParent, 0.0);
        rebuilt.nodes[anchor].parent = fresh;
      }
    }
  }

  // Parent links changed wholesale; rebuild child lists and costs.
  std::size_t root = kNoParent;
  for (auto& list : rebuilt.children) {
    list.clear();
  }
  for (std::size_t i = 0; i < rebuilt.nodes.size(); ++i) {
    if (rebuilt.nodes[i].parent == kNoParent) {
      root = i;
    } else {
      rebuilt.children[rebuilt.nodes[i].parent].push_back(i);
    }
  }
  rebuilt.nodes[root].cost_to_come = 0.0;
  std::vector<std::size_t> stack{root};
  while (!stack.empty()) {
    const std::size_t at = stack.back();
    stack.pop_back();
    for (const std::size_t child : rebuilt.children[at]) {
      rebuilt.nodes[child].cost_to_come =
          rebuilt.nodes[at].cost_to_come +
          distance(rebuilt.nodes[at].position, rebuilt.nodes[child].position);
      stack.push_back(child);
    }
  }

  ReplanResult result;
  std::size_t reached =
      best_goal_node(rebuilt.nodes, goal, params.goal_radius_m);
  if (reached == kNoParent) {
    Rng rng(seed);
    for (std::size_t it = 0; it < params.iterations; ++it) {
      const std::size_t added = extend(env_updated, params, goal, rng, rebuilt);
      if (added == kNoParent) {
        continue;
      }
      ++result.expansions;
      if (distance(rebuilt.nodes[added].position, goal) <=
          params.goal_radius_m) {
        reached = added;
        break;
      }
    }
  }

  result.tree.nodes = std::move(rebuilt.nodes);
  if (reached != kNoParent) {
    result.tree.goal_path = chain_to_root(result.tree.nodes, reached);
    result.success = true;
  }
  result.delay_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

std::vector<Vec3> goal_path_points(const PlanTree& tree) {
  std::vector<Vec3> points;
  points.reserve(tree.goal_path.size());
  for (const std::size_t i : tree.goal_path) {
    points.push_back(tree.nodes[i].position);
  }
  return points;
}

double path_length(const std::vector<Vec3>& points) {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    total += distance(points[i - 1], points[i]);
  }
  return total;
}

}  // namespace iscc::control
