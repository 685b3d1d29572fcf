#ifndef HTMPC_BASELINES_APF_HPP_
#define HTMPC_BASELINES_APF_HPP_

// Artificial potential fields with a horizon-based look-ahead: repulsion is
// evaluated against obstacle positions extrapolated over a few steps.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "htmpc/errors.hpp"
#include "htmpc/geometry.hpp"
#include "htmpc/kinematics.hpp"
#include "htmpc/world.hpp"

namespace htmpc {

struct ApfParams {
  double attraction_gain{1.0};
  double repulsion_gain{0.5};
  double influence_radius{1.5};
  int horizon_steps{5};
  double speed_gain{1.0};    // speed = speed_gain * |force|, clamped
  double heading_gain{1.0};  // fraction of the heading error removed per step
  double min_force{1e-6};    // below this the robot stops
  bool slow_in_turns{true};  // scale the speed by the cosine of the heading error

  bool operator==(const ApfParams&) const = default;

  void validate() const {
    if (!(attraction_gain > 0.0) || !(repulsion_gain > 0.0) || !(influence_radius > 0.0) || horizon_steps < 0) {
      throw ConfigError("ApfParams: gains and influence radius must be positive");
    }
  }
};

/// Net force on the robot: unit attraction toward the target scaled by the
/// attraction gain, minus the classic inverse-distance repulsion of every
/// obstacle within the influence radius.
inline Vec2 apf_force(const Vec2& robot, const Vec2& target, const std::vector<Vec2>& obstacles,
                      const ApfParams& p) {
  Vec2 force{};
  const Vec2 to_target = target - robot;
  if (to_target.norm() > kGeomTol) force = to_target.normalized() * p.attraction_gain;
  for (const Vec2& o : obstacles) {
    const Vec2 away = robot - o;
    const double d = away.norm();
    if (d >= p.influence_radius || d <= kGeomTol) continue;
    const double mag = p.repulsion_gain * (1.0 / d - 1.0 / p.influence_radius) / (d * d);
    force += away / d * mag;
  }
  return force;
}

/// Obstacle positions the force is evaluated against: static centers and the
/// dynamic ones at every step of the look-ahead horizon.
inline std::vector<Vec2> apf_obstacles(const PerceptionSnapshot& snapshot, int horizon_steps, double c) {
  std::vector<Vec2> out;
  for (const Disc& d : snapshot.visible_static) out.push_back(d.center);
  for (const auto& o : snapshot.visible_dynamic) {
    for (int k = 0; k <= horizon_steps; ++k) out.push_back(o.position + o.velocity * (k * c));
  }
  return out;
}

/// Heading follows the force direction; speed is proportional to the force
/// magnitude, clamped to the bounds and optionally reduced while turning.
/// With `arena` (width, height) the nearest point of each wall repels too.
inline Input apf_step(const PerceptionSnapshot& snapshot, const Vec2& target, const ApfParams& params,
                      const InputBounds& bounds, double c, const std::optional<Vec2>& arena = std::nullopt) {
  params.validate();
  const Pose& pose = snapshot.robot.pose;
  std::vector<Vec2> obstacles = apf_obstacles(snapshot, params.horizon_steps, c);
  if (arena) {
    const Vec2 r = pose.position();
    obstacles.insert(obstacles.end(), {{0.0, r.y}, {arena->x, r.y}, {r.x, 0.0}, {r.x, arena->y}});
  }
  const Vec2 force = apf_force(pose.position(), target, obstacles, params);
  const double mag = force.norm();
  if (mag < params.min_force) return bounds.clamp({0.0, 0.0});
  const double error = normalize_angle(force.angle() - pose.theta);
  const double omega = params.heading_gain * error / c;
  const double base = params.speed_gain * mag;
  const double speed = params.slow_in_turns ? base * std::max(0.0, std::cos(error)) : base;
  return bounds.clamp({speed, omega});
}

}  // namespace htmpc

#endif  // HTMPC_BASELINES_APF_HPP_
