#ifndef HTMPC_BASELINES_RRT_HPP_
#define HTMPC_BASELINES_RRT_HPP_

// Horizon-limited RRT*. The tree grows inside the perception horizon with
// samples biased toward the horizon boundary and the target. Obstacles are
// ignored while growing; only the finally selected path is checked, against
// the obstacle positions perceived now.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "htmpc/errors.hpp"
#include "htmpc/geometry.hpp"
#include "htmpc/rng.hpp"
#include "htmpc/world.hpp"

namespace htmpc {

struct RrtParams {
  double horizon_radius{4.0};
  double step{0.4};             // steering distance
  double neighbor_radius{0.9};  // rewiring radius
  double goal_bias{0.15};
  double horizon_bias{0.35};
  double horizon_spread{1.2};   // half-width (rad) of horizon samples around the target bearing
  double clearance{0.7};        // required center distance on the final path (the HTMPC safe radius)
  int max_iterations{400};      // sampling budget per plan

  bool operator==(const RrtParams&) const = default;
};

struct RrtNode {
  Vec2 position;
  int parent{-1};
  double cost{0.0};
};

struct RrtTree {
  std::vector<RrtNode> nodes;
  double horizon_radius{0.0};
  double goal_bias{0.0};

  /// Every cost equals the parent's cost plus the edge length, and parent
  /// links lead back to the root without cycles.
  bool consistent(double tol = 1e-9) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const RrtNode& n = nodes[i];
      if (n.parent < 0) {
        if (i != 0 || n.cost != 0.0) return false;
        continue;
      }
      if (n.parent >= static_cast<int>(nodes.size())) return false;
      const RrtNode& p = nodes[n.parent];
      if (std::abs(n.cost - p.cost - distance(n.position, p.position)) > tol) return false;
      std::size_t hops = 0;
      for (int j = n.parent; j >= 0; j = nodes[j].parent) {
        if (++hops > nodes.size()) return false;
      }
    }
    return true;
  }
};

struct RrtResult {
  std::optional<std::vector<Vec2>> path;  // polyline from the robot
  RrtTree tree;
  int iterations{0};
};

namespace detail {

inline bool polyline_clear(const std::vector<Vec2>& pts, const std::vector<Vec2>& obstacles, double clearance) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Segment s{pts[i - 1], pts[i]};
    for (const Vec2& o : obstacles) {
      if (point_segment_distance(o, s) <= clearance) return false;
    }
  }
  return true;
}

inline void reparent(RrtTree& tree, int child, int parent) {
  tree.nodes[child].parent = parent;
  // Propagate the new cost through the subtree.
  std::vector<int> stack{child};
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    const RrtNode& p = tree.nodes[tree.nodes[n].parent];
    tree.nodes[n].cost = p.cost + distance(tree.nodes[n].position, p.position);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (tree.nodes[i].parent == n) stack.push_back(static_cast<int>(i));
    }
  }
}

}  // namespace detail

/// Grows the tree within `max_iterations` samples and returns the path to the
/// node closest to the target, provided it gets closer than the robot is and
/// passes the collision check. Otherwise no path: the robot should hold.
inline RrtResult hlrrt_plan(const PerceptionSnapshot& snapshot, const Vec2& target, const RrtParams& params,
                            Rng& rng) {
  RrtResult out;
  const Vec2 root = snapshot.robot.pose.position();
  out.tree.horizon_radius = params.horizon_radius;
  out.tree.goal_bias = params.goal_bias;
  out.tree.nodes.push_back({root, -1, 0.0});
  if (params.max_iterations <= 0) return out;

  const Vec2 to_target = target - root;
  const double bearing = to_target.angle();
  const Vec2 goal = to_target.norm() <= params.horizon_radius ? target
                                                              : root + to_target.normalized() * params.horizon_radius;
  auto& nodes = out.tree.nodes;
  for (int it = 0; it < params.max_iterations; ++it) {
    out.iterations = it + 1;
    Vec2 sample;
    const double mode = rng.uniform();
    if (mode < params.goal_bias) {
      sample = goal;
    } else if (mode < params.goal_bias + params.horizon_bias) {
      const double a = bearing + rng.uniform(-params.horizon_spread, params.horizon_spread);
      sample = root + Vec2::polar(params.horizon_radius, a);
    } else {
      sample = root + rng.in_disc<Vec2>(params.horizon_radius);
    }
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = distance(nodes[i].position, sample);
      if (d < best) {
        best = d;
        nearest = static_cast<int>(i);
      }
    }
    if (best <= 1e-9) continue;
    const Vec2 from = nodes[nearest].position;
    const Vec2 pos = best <= params.step ? sample : from + (sample - from).normalized() * params.step;
    // Choose the cheapest parent in the neighborhood, then rewire around it.
    int parent = nearest;
    double cost = nodes[nearest].cost + distance(from, pos);
    std::vector<int> near;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (distance(nodes[i].position, pos) <= params.neighbor_radius) near.push_back(static_cast<int>(i));
    }
    for (int i : near) {
      const double c = nodes[i].cost + distance(nodes[i].position, pos);
      if (c < cost - 1e-12) {
        cost = c;
        parent = i;
      }
    }
    nodes.push_back({pos, parent, cost});
    const int added = static_cast<int>(nodes.size()) - 1;
    for (int i : near) {
      if (i == parent) continue;
      const double c = cost + distance(pos, nodes[i].position);
      if (c < nodes[i].cost - 1e-12) detail::reparent(out.tree, i, added);
    }
  }

  std::vector<Vec2> obstacles;
  for (const Disc& d : snapshot.visible_static) obstacles.push_back(d.center);
  for (const auto& o : snapshot.visible_dynamic) obstacles.push_back(o.position);

  // Candidates ordered by remaining distance to the target, then by cost.
  std::vector<int> order(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = distance(nodes[a].position, target);
    const double db = distance(nodes[b].position, target);
    return da < db - 1e-12 || (std::abs(da - db) <= 1e-12 && nodes[a].cost < nodes[b].cost);
  });
  const double now = distance(root, target);
  for (int n : order) {
    if (distance(nodes[n].position, target) >= now - 1e-9) break;
    std::vector<Vec2> pts;
    for (int j = n; j >= 0; j = nodes[j].parent) pts.push_back(nodes[j].position);
    std::reverse(pts.begin(), pts.end());
    if (detail::polyline_clear(pts, obstacles, params.clearance)) {
      out.path = std::move(pts);
      return out;
    }
  }
  return out;
}

}  // namespace htmpc

#endif  // HTMPC_BASELINES_RRT_HPP_
