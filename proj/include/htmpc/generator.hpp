#ifndef HTMPC_GENERATOR_HPP_
#define HTMPC_GENERATOR_HPP_

// Reconstructed benchmark scenarios. The original layouts are not public, so
// these follow the stated counts (case 1: 6 static + 5 dynamic obstacles,
// case 2: 8 static + 8 dynamic) in a 14 m x 14 m arena. Case 2 adds obstacles
// whose attraction points pull them across the robot's corridor so that
// temporarily infeasible tracking problems arise.

#include <cmath>
#include <cstdint>
#include <string>

#include "htmpc/baselines/apf.hpp"
#include "htmpc/rng.hpp"
#include "htmpc/scenario.hpp"

namespace htmpc {

/// Named APF tunings: "paper-failure" reproduces the livelock of an ill-tuned
/// field, "retuned" removes it.
inline ApfParams apf_tuning(const std::string& name) {
  ApfParams p;
  if (name == "paper-failure") {
    // Far-reaching, strong repulsion, sluggish heading and no slowdown while
    // turning: the robot overshoots every force reversal and loops.
    p.attraction_gain = 0.4;
    p.repulsion_gain = 4.0;
    p.influence_radius = 4.0;
    p.horizon_steps = 10;
    p.speed_gain = 1.2;
    p.heading_gain = 0.2;
    p.slow_in_turns = false;
  } else if (name == "retuned") {
    p.attraction_gain = 1.0;
    p.repulsion_gain = 0.4;
    p.influence_radius = 1.5;
    p.horizon_steps = 5;
    p.speed_gain = 0.6;
    p.heading_gain = 0.5;
    p.slow_in_turns = true;
  } else {
    throw ConfigError("unknown APF tuning: " + name);
  }
  return p;
}

struct GeneratorOptions {
  int case_id{1};
  int index{0};
  std::uint64_t seed{1};
};

/// Deterministic scenario for (case, index). The layout depends only on the
/// case and index; `seed` sets the run's random streams.
inline ScenarioConfig generate_scenario(const GeneratorOptions& opt) {
  if (opt.case_id != 1 && opt.case_id != 2) throw ConfigError("generate_scenario: case must be 1 or 2");
  Rng rng = Rng::stream(0x5eed0000ULL + static_cast<std::uint64_t>(opt.case_id), static_cast<std::uint64_t>(opt.index));
  ScenarioConfig cfg;
  cfg.case_label = "case" + std::to_string(opt.case_id);
  cfg.id = cfg.case_label + "_s" + (opt.index < 9 ? "0" : "") + std::to_string(opt.index + 1);
  cfg.note = "reconstruction: layout generated to match the published obstacle counts and arena size";
  cfg.world.rng_seed = opt.seed;
  cfg.world.arena_width = 14.0;
  cfg.world.arena_height = 14.0;

  // Start and target near opposite corners, jittered.
  cfg.start = {1.0 + rng.uniform(0.0, 0.6), 1.0 + rng.uniform(0.0, 0.6)};
  cfg.target = {12.4 + rng.uniform(0.0, 0.6), 12.4 + rng.uniform(0.0, 0.6)};
  cfg.start_heading = (cfg.target - cfg.start).angle();
  const Vec2 a = cfg.start;
  const Vec2 b = cfg.target;
  const Vec2 dir = (b - a).normalized();
  const Vec2 normal = dir.perp();
  const double span = distance(a, b);

  const int n_static = opt.case_id == 1 ? 6 : 8;
  const int n_dynamic = opt.case_id == 1 ? 5 : 8;
  const double keep = 1.6;  // clearance of obstacle centers from start and target

  auto free_spot = [&](const Vec2& p, double gap) {
    if (p.x < 0.8 || p.x > 13.2 || p.y < 0.8 || p.y > 13.2) return false;
    if (distance(p, a) < keep || distance(p, b) < keep) return false;
    for (const Vec2& q : cfg.world.static_obstacles) {
      if (distance(p, q) < gap) return false;
    }
    return true;
  };
  // A concave pocket of three obstacles on the corridor, open toward the
  // start. Neighbors sit closer than two inflated radii, so planners treat it
  // as a wall to go around; a potential field is drawn into it.
  {
    const double s = rng.uniform(0.4, 0.55) * span;
    const Vec2 center = a + dir * s + normal * rng.uniform(-0.3, 0.3);
    const double radius = 1.3;
    const double spread = 60.0 * std::acos(-1.0) / 180.0;  // neighbors 1.3 m apart
    for (double phi : {-spread, 0.0, spread}) {
      cfg.world.static_obstacles.push_back(center + (dir * std::cos(phi) + normal * std::sin(phi)) * radius);
    }
  }
  // The rest scattered along the corridor, some right on the line.
  for (int i = 3, tries = 0; i < n_static && tries < 10000; ++tries) {
    const double s = rng.uniform(0.18, 0.82) * span;
    const double lateral = (i % 3 == 0 ? rng.uniform(-0.3, 0.3) : rng.uniform(-2.5, 2.5));
    const Vec2 p = a + dir * s + normal * lateral;
    if (!free_spot(p, 1.7)) continue;
    cfg.world.static_obstacles.push_back(p);
    ++i;
  }

  // Dynamic obstacles oscillate about attraction points near the corridor.
  const InputBounds robot_bounds = cfg.htmpc.bounds;
  const AxisVelocityBounds axis = AxisVelocityBounds::from_input(robot_bounds);
  for (int i = 0, tries = 0; i < n_dynamic && tries < 10000; ++tries) {
    DynamicObstacleState o;
    const double s = rng.uniform(0.2, 0.85) * span;
    const bool crusher = opt.case_id == 2 && i < 3;
    if (crusher) {
      // Attraction point on the corridor, start well off to one side.
      o.attraction = a + dir * s + normal * rng.uniform(-0.3, 0.3);
      const double side = (i % 2 == 0) ? 1.0 : -1.0;
      o.position = o.attraction + normal * (side * rng.uniform(1.6, 2.4)) + dir * rng.uniform(-0.5, 0.5);
    } else {
      o.attraction = a + dir * s + normal * rng.uniform(-1.5, 1.5);
      Vec2 off{rng.uniform(1.5, 2.2), rng.uniform(1.5, 2.2)};
      if (rng.coin()) off.x = -off.x;
      if (rng.coin()) off.y = -off.y;
      o.position = o.attraction + off;
    }
    // Keep both per-axis offsets at least 1.5 m so the multipliers stay in the
    // range used for the prediction-error bound.
    Vec2 off = o.position - o.attraction;
    if (std::abs(off.x) < 1.5) off.x = off.x < 0.0 ? -1.5 : 1.5;
    if (std::abs(off.y) < 1.5) off.y = off.y < 0.0 ? -1.5 : 1.5;
    o.position = o.attraction + off;
    if (o.position.x < 0.5 || o.position.x > 13.5 || o.position.y < 0.5 || o.position.y > 13.5) continue;
    if (distance(o.position, a) < 2.5 || distance(o.attraction, b) < 1.5 || distance(o.attraction, a) < 2.0) continue;
    o.velocity = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    const double eta = opt.case_id == 1 ? rng.uniform(0.0, 0.25) : rng.uniform(0.5, 1.0);
    const auto [alpha, beta] = compute_multipliers(o, axis, eta);
    o.alpha = alpha;
    o.beta = beta;
    cfg.world.dynamic_obstacles.push_back(o);
    ++i;
  }
  if (static_cast<int>(cfg.world.static_obstacles.size()) != n_static ||
      static_cast<int>(cfg.world.dynamic_obstacles.size()) != n_dynamic) {
    throw ConfigError("generate_scenario: could not place all obstacles");
  }
  cfg.apf.tuning = "paper-failure";
  cfg.apf.params = apf_tuning(cfg.apf.tuning);
  return cfg;
}

}  // namespace htmpc

#endif  // HTMPC_GENERATOR_HPP_
