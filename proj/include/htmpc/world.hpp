#ifndef HTMPC_WORLD_HPP_
#define HTMPC_WORLD_HPP_

// Ground-truth simulation: oscillating dynamic obstacles, disturbed robot
// motion and a memoryless, noisy perception model.

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "htmpc/errors.hpp"
#include "htmpc/geometry.hpp"
#include "htmpc/integrator.hpp"
#include "htmpc/kinematics.hpp"
#include "htmpc/rng.hpp"

namespace htmpc {

struct DynamicObstacleState {
  Vec2 position;
  Vec2 velocity;
  Vec2 attraction;
  double alpha{0.1};  // 1/s^2, x restoring multiplier
  double beta{0.1};   // 1/s^2, y restoring multiplier

  bool operator==(const DynamicObstacleState&) const = default;
};

struct RobotState {
  Pose pose;
  Input input;
  std::int64_t step{0};
};

struct WorldConfig {
  double arena_width{14.0};
  double arena_height{14.0};
  std::vector<Vec2> static_obstacles;
  std::vector<DynamicObstacleState> dynamic_obstacles;
  double obstacle_radius{0.3};
  double robot_radius{0.2};
  double perception_radius{5.0};
  double disturbance_bound{0.01};
  double perception_error_bound{0.05};
  double sampling_time{0.1};
  std::uint64_t rng_seed{0};

  bool operator==(const WorldConfig&) const = default;

  void validate() const {
    if (!(arena_width > 0.0) || !(arena_height > 0.0)) throw ConfigError("arena must be positive");
    if (!(sampling_time > 0.0)) throw ConfigError("sampling_time must be positive");
    if (obstacle_radius <= 0.0 || robot_radius <= 0.0) throw ConfigError("radii must be positive");
    if (disturbance_bound < 0.0 || perception_error_bound < 0.0 || perception_radius < 0.0) {
      throw ConfigError("bounds must be nonnegative");
    }
    for (const auto& o : dynamic_obstacles) {
      if (!(o.alpha > 0.0) || !(o.beta > 0.0)) throw ConfigError("obstacle multipliers must be positive");
    }
  }

  double collision_distance() const { return robot_radius + obstacle_radius; }
};

struct PerceivedDynamic {
  Vec2 position;
  Vec2 velocity;
};

struct PerceptionSnapshot {
  std::vector<Disc> visible_static;
  std::vector<PerceivedDynamic> visible_dynamic;
  RobotState robot;
  double obstacle_radius{0.3};
  double perception_radius{5.0};
};

/// Advances a dynamic obstacle by one sampling interval. Position and
/// velocity are integrated jointly with the 3/8 Runge-Kutta rule, so the
/// restoring acceleration alpha*(x_att - x) pulls the obstacle toward its
/// attraction point.
inline DynamicObstacleState step_dynamic_obstacle(const DynamicObstacleState& s, double c) {
  using State = std::array<double, 4>;
  const auto f = [&](double, const State& y) -> State {
    return {y[2], y[3], s.alpha * (s.attraction.x - y[0]), s.beta * (s.attraction.y - y[1])};
  };
  const State next = rk38_step<State>(f, 0.0, {s.position.x, s.position.y, s.velocity.x, s.velocity.y}, c);
  DynamicObstacleState out = s;
  out.position = {next[0], next[1]};
  out.velocity = {next[2], next[3]};
  return out;
}

/// Velocity range of the robot along the world axes.
struct AxisVelocityBounds {
  double x_min{-1.0};
  double x_max{1.0};
  double y_min{-1.0};
  double y_max{1.0};

  static AxisVelocityBounds from_input(const InputBounds& b) {
    const double top = std::max(std::abs(b.min.v), std::abs(b.max.v));
    return {-top, top, -top, top};
  }
};

/// Restoring multipliers of a dynamic obstacle from its initial offset to the
/// attraction point, the robot's velocity range and the aggressiveness eta.
inline std::pair<double, double> compute_multipliers(const DynamicObstacleState& initial,
                                                     const AxisVelocityBounds& bounds, double eta) {
  if (eta < 0.0 || eta > 1.0) throw ConfigError("compute_multipliers: eta outside [0, 1]");
  const double dx = bounds.x_max - bounds.x_min + std::abs(initial.position.x - initial.attraction.x);
  const double dy = bounds.y_max - bounds.y_min + std::abs(initial.position.y - initial.attraction.y);
  if (dx <= 0.0 || dy <= 0.0) throw ConfigError("compute_multipliers: zero denominator");
  const double gain = 0.2 * (1.0 + 4.0 * eta);
  return {gain / dx, gain / dy};
}

/// Nominal kinematic step followed by an additive position disturbance drawn
/// uniformly from the disc of radius `disturbance_bound`.
inline RobotState step_robot_truth(const RobotState& s, const Input& u, double c, double disturbance_bound,
                                   Rng& rng) {
  RobotState out;
  out.pose = step_pose(s.pose, u, c);
  if (disturbance_bound > 0.0) {
    const Vec2 w = rng.in_disc<Vec2>(disturbance_bound);
    out.pose.x += w.x;
    out.pose.y += w.y;
  }
  out.input = u;
  out.step = s.step + 1;
  return out;
}

/// Ground-truth world state: configuration plus the current obstacle states.
class World {
 public:
  explicit World(WorldConfig config) : config_(std::move(config)), dynamic_(config_.dynamic_obstacles) {
    config_.validate();
  }

  const WorldConfig& config() const { return config_; }
  const std::vector<DynamicObstacleState>& dynamic_obstacles() const { return dynamic_; }
  std::int64_t step() const { return step_; }

  void advance() {
    for (auto& o : dynamic_) o = step_dynamic_obstacle(o, config_.sampling_time);
    ++step_;
  }

  /// Smallest center-to-center distance between the robot and any obstacle.
  double min_obstacle_distance(const Vec2& robot) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& c : config_.static_obstacles) best = std::min(best, distance(robot, c));
    for (const auto& o : dynamic_) best = std::min(best, distance(robot, o.position));
    return best;
  }

 private:
  WorldConfig config_;
  std::vector<DynamicObstacleState> dynamic_;
  std::int64_t step_{0};
};

/// Closed condition: touching at exactly rho_rob + rho_obs counts as a collision.
inline bool check_collision(const RobotState& robot, const World& world) {
  return world.min_obstacle_distance(robot.pose.position()) <= world.config().collision_distance();
}

/// What the robot sees this step. Static obstacles are exact, dynamic positions
/// carry a bounded uniform error, the robot's own state is exact.
inline PerceptionSnapshot perceive(const World& world, const RobotState& robot, Rng& rng) {
  const WorldConfig& cfg = world.config();
  PerceptionSnapshot snap;
  snap.robot = robot;
  snap.obstacle_radius = cfg.obstacle_radius;
  snap.perception_radius = cfg.perception_radius;
  const Vec2 r = robot.pose.position();
  const double reach = cfg.perception_radius + cfg.obstacle_radius;
  for (const Vec2& c : cfg.static_obstacles) {
    if (distance(c, r) < reach) snap.visible_static.push_back({c, cfg.obstacle_radius});
  }
  // One error draw per obstacle and step, visible or not, so the noise sequence
  // does not depend on where the controller drove the robot.
  for (const auto& o : world.dynamic_obstacles()) {
    Vec2 p = o.position;
    if (cfg.perception_error_bound > 0.0) p += rng.in_disc<Vec2>(cfg.perception_error_bound);
    if (distance(o.position, r) >= reach) continue;
    snap.visible_dynamic.push_back({p, o.velocity});
  }
  return snap;
}

}  // namespace htmpc

#endif  // HTMPC_WORLD_HPP_
