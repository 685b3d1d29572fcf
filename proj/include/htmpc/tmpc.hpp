#ifndef HTMPC_TMPC_HPP_
#define HTMPC_TMPC_HPP_

// Tube-based MPC tracker. The decision variables are the free inputs of the
// control horizon; states follow from rolling the robot model forward from the
// measured state, so the dynamics hold exactly. Separation constraints are
// tightened by the tube widths of the robot and of the perceived obstacles.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "htmpc/errors.hpp"
#include "htmpc/gain.hpp"
#include "htmpc/geometry.hpp"
#include "htmpc/kinematics.hpp"
#include "htmpc/pattern_search.hpp"
#include "htmpc/planner.hpp"
#include "htmpc/rng.hpp"
#include "htmpc/tube.hpp"
#include "htmpc/world.hpp"

namespace htmpc {

enum class DiscountMode { kPerStep, kPaperExponent };

struct TmpcConfig {
  int horizon{5};          // N^p
  int control_horizon{5};  // N^c
  double sampling_time{0.1};
  double w1{0.9};
  double w2{0.01};
  DiscountMode discount{DiscountMode::kPerStep};
  // Bounds on the robot center; the heading is unbounded.
  double x_min{0.0};
  double x_max{14.0};
  double y_min{0.0};
  double y_max{14.0};
  InputBounds bounds{{-0.2, -1.5}, {1.0, 1.5}};
  double u_smooth{0.5};
  double safe_radius{0.7};
  double plan_radius_floor{0.1};  // rho_plan >= safe_radius + this
  TubeParams tube;
  double penalty{1e3};
  double feasibility_tol{1e-6};
  int starts{4};
  // Search budget per decision; see SearchProblem.
  std::int64_t max_evaluations{0};
  double budget_seconds{0.15};
  double seconds_per_evaluation{0.0};
  double initial_step{0.25};
  double min_step{1e-6};
  LqrWeights lqr;

  void validate() const {
    if (horizon < 1 || control_horizon < 1 || control_horizon > horizon) {
      throw ConfigError("TmpcConfig: need 1 <= N^c <= N^p");
    }
    if (!(w1 > 0.0 && w1 < 1.0)) throw ConfigError("TmpcConfig: w1 must lie in (0, 1)");
    if (w2 < 0.0) throw ConfigError("TmpcConfig: w2 must be nonnegative");
    if (tube.robot_damping < 0.0 || tube.robot_damping > 1.0 || tube.obstacle_damping < 0.0 ||
        tube.obstacle_damping > 1.0) {
      throw ConfigError("TmpcConfig: damping outside [0, 1]");
    }
    if (!(sampling_time > 0.0) || x_min >= x_max || y_min >= y_max || u_smooth < 0.0 || starts < 1) {
      throw ConfigError("TmpcConfig: invalid bounds or sampling time");
    }
  }
};

struct TmpcProblem {
  RobotState current;
  Input previous_input;
  ReferenceTrajectory reference;  // window: states[0..N^p], inputs[0..N^p-1]
  PerceptionSnapshot snapshot;
  double plan_radius{1.0};
  std::int64_t step{0};  // absolute kappa, used by the absolute-time discount
  std::optional<std::vector<Input>> warm_start;
};

/// Largest distance from `p` to any point of `path`.
inline double farthest_distance(const GeometricPath& path, const Vec2& p) {
  double best = 0.0;
  for (const auto& e : path.elements()) {
    best = std::max({best, distance(p, element_start(e)), distance(p, element_end(e))});
    if (const auto* a = std::get_if<Arc>(&e)) {
      const Vec2 away = a->disc.center - p;
      if (away.norm() > kGeomTol && a->contains_angle(away.angle())) {
        best = std::max(best, away.norm() + a->disc.radius);
      }
    }
  }
  return best;
}

/// rho_plan: the largest distance of the robot from the planned path, floored
/// so that the zone constraint keeps a nonempty interior.
inline double plan_radius(const GeometricPath& path, const Vec2& robot, double safe_radius, double floor = 0.1) {
  return std::max(farthest_distance(path, robot), safe_radius + floor);
}

inline double discount_weight(int k, std::int64_t kappa, double w1, DiscountMode mode) {
  if (mode == DiscountMode::kPerStep) return std::pow(w1, k);
  const double absolute = static_cast<double>(kappa + k);
  return std::pow(w1, absolute / static_cast<double>(kappa + 1));
}

/// Discounted tracking error plus weighted input energy. `states[k-1]` is the
/// predicted state at step kappa+k; `inputs[k]` the input at kappa+k.
inline double objective(const std::vector<Pose>& states, const std::vector<Input>& inputs,
                        const ReferenceTrajectory& reference, double w1, double w2, DiscountMode mode,
                        std::int64_t kappa = 0) {
  const int np = static_cast<int>(states.size());
  if (static_cast<int>(inputs.size()) != np || reference.horizon() < np ||
      static_cast<int>(reference.states.size()) < np + 1) {
    throw ConfigError("objective: trajectory lengths do not match the horizon");
  }
  double tracking = 0.0;
  double energy = 0.0;
  for (int k = 1; k <= np; ++k) {
    tracking += discount_weight(k, kappa, w1, mode) * state_error(states[k - 1], reference.states[k]).norm();
    energy += inputs[k - 1].squared_norm();
  }
  return tracking + w2 * energy;
}

enum class ConstraintKind {
  kStateBox,
  kInputBox,
  kSlew,
  kZone,            // stay within rho_plan of the robot
  kStatic,
  kDynamicPrev,     // obstacle at k-1, k > kappa+1
  kDynamicCurrent,  // obstacle at k
  kDynamicNext,     // obstacle at k+1, k < kappa+N^p
};

inline const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kStateBox: return "state_box";
    case ConstraintKind::kInputBox: return "input_box";
    case ConstraintKind::kSlew: return "slew";
    case ConstraintKind::kZone: return "zone";
    case ConstraintKind::kStatic: return "static";
    case ConstraintKind::kDynamicPrev: return "dynamic_prev";
    case ConstraintKind::kDynamicCurrent: return "dynamic_current";
    case ConstraintKind::kDynamicNext: return "dynamic_next";
  }
  return "unknown";
}

/// One scalar inequality g <= 0 at prediction step k (1-based offset from kappa).
struct Constraint {
  ConstraintKind kind;
  int k{1};
  int obstacle{-1};  // index into the snapshot's static or dynamic list
  int index{0};      // prediction offset of the obstacle position, for dynamic kinds
  Vec2 center;       // obstacle or zone center
  double bound{0.0}; // separation or radius
};

struct ConstraintSet {
  std::vector<Constraint> items;

  std::size_t count(ConstraintKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(items.begin(), items.end(), [&](const Constraint& c) { return c.kind == kind; }));
  }
};

/// Position of a perceived dynamic obstacle `j` steps ahead by linear extrapolation.
inline Vec2 extrapolate(const PerceivedDynamic& o, int j, double c) { return o.position + o.velocity * (j * c); }

inline ConstraintSet build_constraints(const TmpcProblem& problem, const TmpcConfig& config) {
  const int np = config.horizon;
  const double c = config.sampling_time;
  const Vec2 here = problem.current.pose.position();
  ConstraintSet set;
  auto add = [&](ConstraintKind kind, int k, int obstacle = -1, int index = 0, Vec2 center = {}, double bound = 0.0) {
    set.items.push_back({kind, k, obstacle, index, center, bound});
  };
  for (int k = 1; k <= np; ++k) {
    add(ConstraintKind::kStateBox, k);
    add(ConstraintKind::kInputBox, k);
    add(ConstraintKind::kSlew, k);
    add(ConstraintKind::kZone, k, -1, 0, here, problem.plan_radius - config.safe_radius);
  }
  const auto& statics = problem.snapshot.visible_static;
  for (int o = 0; o < static_cast<int>(statics.size()); ++o) {
    for (int k = 1; k <= np; ++k) {
      add(ConstraintKind::kStatic, k, o, 0, statics[o].center,
          config.safe_radius + tube_width_robot(k, 0, config.tube));
    }
  }
  const auto& dynamics = problem.snapshot.visible_dynamic;
  for (int o = 0; o < static_cast<int>(dynamics.size()); ++o) {
    for (int k = 1; k <= np; ++k) {
      const double wr = tube_width_robot(k, 0, config.tube);
      if (k > 1) {
        add(ConstraintKind::kDynamicPrev, k, o, k - 1, extrapolate(dynamics[o], k - 1, c),
            config.safe_radius + wr + tube_width_obstacle(k - 1, 0, config.tube));
      }
      add(ConstraintKind::kDynamicCurrent, k, o, k, extrapolate(dynamics[o], k, c),
          config.safe_radius + wr + tube_width_obstacle(k, 0, config.tube));
      if (k < np) {
        add(ConstraintKind::kDynamicNext, k, o, k + 1, extrapolate(dynamics[o], k + 1, c),
            config.safe_radius + wr + tube_width_obstacle(k + 1, 0, config.tube));
      }
    }
  }
  return set;
}

/// Expands the decision vector (free inputs of the control horizon) into the
/// full input sequence; inputs after the control horizon repeat the last one.
inline std::vector<Input> expand_inputs(const Eigen::VectorXd& z, int horizon) {
  const int nc = static_cast<int>(z.size() / 2);
  std::vector<Input> u(horizon);
  for (int k = 0; k < horizon; ++k) {
    const int j = std::min(k, nc - 1);
    u[k] = {z(2 * j), z(2 * j + 1)};
  }
  return u;
}

inline std::vector<Pose> rollout(const Pose& x0, const std::vector<Input>& inputs, double c) {
  std::vector<Pose> out;
  out.reserve(inputs.size());
  Pose x = x0;
  for (const Input& u : inputs) {
    x = step_pose(x, u, c);
    out.push_back(x);
  }
  return out;
}

/// Positive part of the violation of one constraint (0 when satisfied).
inline double violation(const Constraint& g, const std::vector<Pose>& states, const std::vector<Input>& inputs,
                        const Input& previous, const TmpcConfig& config) {
  const Pose& x = states[g.k - 1];
  const Vec2 r = x.position();
  switch (g.kind) {
    case ConstraintKind::kStateBox:
      return std::max({0.0, config.x_min - x.x, x.x - config.x_max, config.y_min - x.y, x.y - config.y_max});
    case ConstraintKind::kInputBox: {
      const Input& u = inputs[g.k - 1];
      const auto& b = config.bounds;
      return std::max({0.0, b.min.v - u.v, u.v - b.max.v, b.min.omega - u.omega, u.omega - b.max.omega});
    }
    case ConstraintKind::kSlew: {
      const Input& before = g.k >= 2 ? inputs[g.k - 2] : previous;
      const Input d = inputs[g.k - 1] - before;
      return std::max(0.0, std::sqrt(d.squared_norm()) - config.u_smooth);
    }
    case ConstraintKind::kZone:
      return std::max(0.0, distance(r, g.center) - g.bound);
    case ConstraintKind::kStatic:
    case ConstraintKind::kDynamicPrev:
    case ConstraintKind::kDynamicCurrent:
    case ConstraintKind::kDynamicNext:
      return std::max(0.0, g.bound - distance(r, g.center));
  }
  return 0.0;
}

/// Signed margin (positive when satisfied) used for reporting active constraints.
inline double margin(const Constraint& g, const std::vector<Pose>& states, const std::vector<Input>& inputs,
                     const Input& previous, const TmpcConfig& config) {
  const Vec2 r = states[g.k - 1].position();
  switch (g.kind) {
    case ConstraintKind::kZone: return g.bound - distance(r, g.center);
    case ConstraintKind::kStatic:
    case ConstraintKind::kDynamicPrev:
    case ConstraintKind::kDynamicCurrent:
    case ConstraintKind::kDynamicNext: return distance(r, g.center) - g.bound;
    default: return -violation(g, states, inputs, previous, config);
  }
}

/// Independent feasibility check of a candidate input sequence, written
/// directly from the constraint definitions rather than from the generated
/// constraint list. Returns the largest violation.
inline double audit(const TmpcProblem& problem, const TmpcConfig& config, const std::vector<Input>& inputs,
                    const std::vector<Pose>& states) {
  const int np = config.horizon;
  const double c = config.sampling_time;
  if (static_cast<int>(inputs.size()) != np || static_cast<int>(states.size()) != np) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  // Dynamics.
  Pose prev = problem.current.pose;
  for (int k = 0; k < np; ++k) {
    const Pose expect = step_pose(prev, inputs[k], c);
    worst = std::max(worst, std::hypot(expect.x - states[k].x, expect.y - states[k].y));
    worst = std::max(worst, std::abs(normalize_angle(expect.theta - states[k].theta)));
    prev = states[k];
  }
  // Control-horizon tying.
  for (int k = config.control_horizon; k < np; ++k) {
    worst = std::max(worst, std::sqrt((inputs[k] - inputs[config.control_horizon - 1]).squared_norm()));
  }
  const Vec2 here = problem.current.pose.position();
  for (int k = 1; k <= np; ++k) {
    const Pose& x = states[k - 1];
    const Input& u = inputs[k - 1];
    const Input& before = k == 1 ? problem.previous_input : inputs[k - 2];
    worst = std::max({worst, config.x_min - x.x, x.x - config.x_max, config.y_min - x.y, x.y - config.y_max});
    worst = std::max({worst, config.bounds.min.v - u.v, u.v - config.bounds.max.v,
                      config.bounds.min.omega - u.omega, u.omega - config.bounds.max.omega});
    worst = std::max(worst, std::hypot(u.v - before.v, u.omega - before.omega) - config.u_smooth);
    worst = std::max(worst, std::hypot(x.x - here.x, x.y - here.y) - (problem.plan_radius - config.safe_radius));
    // Robot tube after k steps: bound * sum of (1 - damping)^i, i < k.
    double wr = 0.0;
    for (int i = 0; i < k; ++i) wr += config.tube.robot_bound * std::pow(1.0 - config.tube.robot_damping, i);
    for (const Disc& s : problem.snapshot.visible_static) {
      worst = std::max(worst, config.safe_radius + wr - std::hypot(x.x - s.center.x, x.y - s.center.y));
    }
    for (const auto& o : problem.snapshot.visible_dynamic) {
      for (int j = k - 1; j <= k + 1; ++j) {
        // No obstacle estimate exists before kappa+1 or after kappa+N^p.
        if (j < 1 || j > np) continue;
        double wo = 0.0;
        for (int i = 0; i < j; ++i) wo += config.tube.obstacle_bound * std::pow(1.0 - config.tube.obstacle_damping, i);
        const double px = o.position.x + o.velocity.x * j * c;
        const double py = o.position.y + o.velocity.y * j * c;
        worst = std::max(worst, config.safe_radius + wr + wo - std::hypot(x.x - px, x.y - py));
      }
    }
  }
  return worst;
}

struct ActiveConstraint {
  ConstraintKind kind;
  int k;
  int obstacle;
  double margin;
};

struct TmpcSolution {
  std::vector<Input> inputs;   // N^p entries, tied after N^c - 1
  std::vector<Pose> states;    // predicted states at kappa+1..kappa+N^p
  double objective{0.0};
  bool feasible{false};
  double violation{0.0};       // audited
  double solve_time{0.0};
  std::int64_t evaluations{0};
  std::vector<FeedbackGain> gains;
  std::vector<ActiveConstraint> active;
  std::vector<double> robot_tube;     // w_rob at k = 1..N^p
  std::vector<double> obstacle_tube;  // w_obs at k = 1..N^p
};

/// Reference window of length N^p starting `offset` steps into `full`.
inline ReferenceTrajectory window(const ReferenceTrajectory& full, int offset, int horizon) {
  if (offset < 0 || offset + horizon > full.horizon()) throw ConfigError("window: reference too short");
  ReferenceTrajectory out;
  out.source_path = full.source_path;
  out.spacing = full.spacing;
  out.states.assign(full.states.begin() + offset, full.states.begin() + offset + horizon + 1);
  out.inputs.assign(full.inputs.begin() + offset, full.inputs.begin() + offset + horizon);
  return out;
}

inline Eigen::VectorXd pack_inputs(const std::vector<Input>& u, int control_horizon) {
  Eigen::VectorXd z(2 * control_horizon);
  for (int j = 0; j < control_horizon; ++j) {
    const Input& v = u[std::min<std::size_t>(j, u.size() - 1)];
    z(2 * j) = v.v;
    z(2 * j + 1) = v.omega;
  }
  return z;
}

/// Solves the tracking problem by multi-start pattern search on the exact
/// penalty function, then audits the best point independently.
inline TmpcSolution solve(const TmpcProblem& problem, const TmpcConfig& config, Rng& rng) {
  config.validate();
  const int np = config.horizon;
  const int nc = config.control_horizon;
  if (problem.reference.horizon() != np || static_cast<int>(problem.reference.states.size()) != np + 1) {
    throw ConfigError("solve: reference horizon must equal N^p");
  }
  if (!(problem.plan_radius > config.safe_radius)) throw ConfigError("solve: rho_plan must exceed rho_safe");
  const double c = config.sampling_time;
  const ConstraintSet constraints = build_constraints(problem, config);

  auto penalized = [&](const Eigen::VectorXd& z) {
    const std::vector<Input> u = expand_inputs(z, np);
    const std::vector<Pose> x = rollout(problem.current.pose, u, c);
    double viol = 0.0;
    for (const Constraint& g : constraints.items) viol += violation(g, x, u, problem.previous_input, config);
    return objective(x, u, problem.reference, config.w1, config.w2, config.discount, problem.step) +
           config.penalty * viol;
  };

  SearchProblem sp;
  sp.dimension = 2 * nc;
  sp.evaluate = penalized;
  sp.lower.resize(2 * nc);
  sp.upper.resize(2 * nc);
  for (int j = 0; j < nc; ++j) {
    sp.lower(2 * j) = config.bounds.min.v;
    sp.lower(2 * j + 1) = config.bounds.min.omega;
    sp.upper(2 * j) = config.bounds.max.v;
    sp.upper(2 * j + 1) = config.bounds.max.omega;
  }
  std::optional<Eigen::VectorXd> warm;
  if (problem.warm_start && !problem.warm_start->empty()) warm = pack_inputs(*problem.warm_start, nc);
  sp.starts = make_starts(warm, pack_inputs(problem.reference.inputs, nc), config.starts, sp.lower, sp.upper, rng);
  // The reference slowed down to fit the zone replaces the first random start.
  // Near the end of a path the zone is much smaller than the reference reach.
  const std::size_t seeded = warm ? 2 : 1;
  if (sp.starts.size() > seeded) {
    double reach = 0.0;
    for (const Input& u : problem.reference.inputs) reach += std::abs(u.v) * c;
    const double zone = problem.plan_radius - config.safe_radius;
    if (reach > zone) {
      std::vector<Input> slow = problem.reference.inputs;
      for (Input& u : slow) u.v *= 0.9 * zone / reach;
      const Eigen::VectorXd z = pack_inputs(slow, nc);
      sp.starts[seeded] = z.cwiseMax(sp.lower).cwiseMin(sp.upper);
    }
  }
  sp.initial_step = config.initial_step;
  sp.min_step = config.min_step;
  sp.max_evaluations = config.max_evaluations;
  sp.budget_seconds = config.budget_seconds;
  sp.seconds_per_evaluation = config.seconds_per_evaluation;
  const SearchResult found = pattern_search(sp);

  TmpcSolution sol;
  sol.inputs = expand_inputs(found.best, np);
  sol.states = rollout(problem.current.pose, sol.inputs, c);
  sol.objective = objective(sol.states, sol.inputs, problem.reference, config.w1, config.w2, config.discount,
                            problem.step);
  sol.violation = audit(problem, config, sol.inputs, sol.states);
  sol.feasible = sol.violation <= config.feasibility_tol;
  sol.solve_time = found.elapsed;
  sol.evaluations = found.evaluations;
  for (int k = 0; k < np; ++k) {
    sol.gains.push_back(synthesize_gain(problem.reference.states[k], problem.reference.inputs[k], c, config.lqr));
    sol.robot_tube.push_back(tube_width_robot(k + 1, 0, config.tube));
    sol.obstacle_tube.push_back(tube_width_obstacle(k + 1, 0, config.tube));
  }
  for (const Constraint& g : constraints.items) {
    const double m = margin(g, sol.states, sol.inputs, problem.previous_input, config);
    if (m <= 1e-3) sol.active.push_back({g.kind, g.k, g.obstacle, m});
  }
  return sol;
}

struct EvasiveOptions {
  int steps{15};        // look-ahead of each candidate manoeuvre
  int grid{7};          // candidate commands per input axis
  double comfort{0.3};  // clearance beyond which progress decides
};

struct EvasiveChoice {
  Input input;
  double clearance{0.0};  // worst predicted clearance over the look-ahead
  std::int64_t evaluations{0};
};

/// Recovery used when the tracker has no feasible solution: each candidate
/// command is approached within the slew limit and held, the robot is rolled
/// out over a longer look-ahead against extrapolated obstacles, and the
/// command with the largest worst-case clearance wins. Candidates that are
/// all comfortably clear are ranked by progress toward `goal`.
inline EvasiveChoice evasive_input(const Pose& current, const Input& previous_input, const PerceptionSnapshot& snapshot,
                                   const Vec2& goal, const TmpcConfig& config, const EvasiveOptions& opt = {}) {
  const double c = config.sampling_time;
  const auto& statics = snapshot.visible_static;
  const auto& dynamics = snapshot.visible_dynamic;
  EvasiveChoice best;
  best.clearance = -std::numeric_limits<double>::infinity();
  double best_score = -std::numeric_limits<double>::infinity();
  const int n = std::max(2, opt.grid);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Input want{config.bounds.min.v + (config.bounds.max.v - config.bounds.min.v) * i / (n - 1),
                       config.bounds.min.omega + (config.bounds.max.omega - config.bounds.min.omega) * j / (n - 1)};
      Pose pose = current;
      Input u = previous_input;
      Input first{};
      double clearance = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= opt.steps; ++k) {
        Input delta = want - u;
        const double norm = std::sqrt(delta.squared_norm());
        if (norm > config.u_smooth && norm > 0.0) delta = {delta.v * config.u_smooth / norm, delta.omega * config.u_smooth / norm};
        u = config.bounds.clamp({u.v + delta.v, u.omega + delta.omega});
        if (k == 1) first = u;
        pose = step_pose(pose, u, c);
        const Vec2 r = pose.position();
        clearance = std::min({clearance, r.x - config.x_min, config.x_max - r.x, r.y - config.y_min,
                              config.y_max - r.y});
        for (const Disc& d : statics) clearance = std::min(clearance, distance(r, d.center) - config.safe_radius);
        for (const auto& o : dynamics) {
          clearance = std::min(clearance, distance(r, extrapolate(o, k, c)) - config.safe_radius);
        }
      }
      ++best.evaluations;
      const double score = std::min(clearance, opt.comfort) - 1e-3 * distance(pose.position(), goal);
      if (score > best_score) {
        best_score = score;
        best.input = first;
        best.clearance = clearance;
      }
    }
  }
  return best;
}

}  // namespace htmpc

#endif  // HTMPC_TMPC_HPP_
