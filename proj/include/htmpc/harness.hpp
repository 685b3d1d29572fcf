#ifndef HTMPC_HARNESS_HPP_
#define HTMPC_HARNESS_HPP_

// Closed-loop experiments: perceive, decide, apply, advance the ground truth,
// and adjudicate success, collision, livelock, infeasibility or timeout.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "htmpc/baselines/apf.hpp"
#include "htmpc/baselines/rrt.hpp"
#include "htmpc/errors.hpp"
#include "htmpc/gain.hpp"
#include "htmpc/planner.hpp"
#include "htmpc/scenario.hpp"
#include "htmpc/tmpc.hpp"
#include "htmpc/world.hpp"

namespace htmpc {

enum class FailureCause { kNone, kCollision, kLivelock, kInfeasible, kTimeout };

inline const char* to_string(FailureCause c) {
  switch (c) {
    case FailureCause::kNone: return "none";
    case FailureCause::kCollision: return "collision";
    case FailureCause::kLivelock: return "livelock";
    case FailureCause::kInfeasible: return "infeasible";
    case FailureCause::kTimeout: return "timeout";
  }
  return "?";
}

/// What a controller returns for one time step.
struct Decision {
  Input input;
  double decision_time{0.0};
  bool replanned{false};
  int infeasible_signals{0};  // tracker infeasibility reports this step
  bool fallback{false};       // least-violation or ancillary fallback applied
  bool dead_end{false};       // no plan could be produced
  std::optional<Pose> reference;
  double objective{0.0};
  bool feasible{true};
  double violation{0.0};
  std::size_t active_constraints{0};
  double robot_tube{0.0};
  double obstacle_tube{0.0};
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual Decision decide(const PerceptionSnapshot& snapshot, const Vec2& target, std::int64_t step) = 0;
  virtual int replan_count() const { return 0; }
  virtual int infeasible_count() const { return 0; }
  /// Replans requested by the tracker after an infeasibility signal.
  virtual int triggered_replans() const { return 0; }
};

// ---------------------------------------------------------------------------
// HTMPC: heuristic planner plus tube-based MPC tracker

class HtmpcController final : public Controller {
 public:
  HtmpcController(const ScenarioConfig& cfg, Rng rng) : cfg_(cfg), rng_(std::move(rng)) {
    const HtmpcParams& p = cfg.htmpc;
    tmpc_.horizon = p.horizon;
    tmpc_.control_horizon = p.control_horizon;
    tmpc_.sampling_time = cfg.world.sampling_time;
    tmpc_.w1 = p.w1;
    tmpc_.w2 = p.w2;
    tmpc_.discount = p.discount;
    tmpc_.x_min = cfg.world.robot_radius;
    tmpc_.y_min = cfg.world.robot_radius;
    tmpc_.x_max = cfg.world.arena_width - cfg.world.robot_radius;
    tmpc_.y_max = cfg.world.arena_height - cfg.world.robot_radius;
    tmpc_.bounds = p.bounds;
    tmpc_.u_smooth = p.u_smooth;
    tmpc_.safe_radius = p.safe_radius;
    tmpc_.tube = p.tube;
    tmpc_.penalty = p.penalty;
    tmpc_.starts = p.starts;
    const bool budgeted = cfg.setup == Setup::kBudgeted;
    if (cfg.wall_clock) {
      tmpc_.max_evaluations = budgeted ? 0 : p.complete_evaluations;
      tmpc_.budget_seconds = budgeted ? cfg.decision_budget : std::numeric_limits<double>::infinity();
      tmpc_.seconds_per_evaluation = 0.0;
    } else {
      tmpc_.max_evaluations = budgeted ? p.budgeted_evaluations : p.complete_evaluations;
      tmpc_.budget_seconds = std::numeric_limits<double>::infinity();
      tmpc_.seconds_per_evaluation = p.seconds_per_evaluation;
    }
    tmpc_.validate();
  }

  std::string name() const override { return "htmpc"; }
  int replan_count() const override { return replans_; }
  int infeasible_count() const override { return infeasible_; }
  int triggered_replans() const override { return triggered_; }

  Decision decide(const PerceptionSnapshot& snapshot, const Vec2& target, std::int64_t step) override {
    Decision d;
    const int np = tmpc_.horizon;
    const bool exhausted = !reference_ || offset_ + np > reference_->horizon() || offset_ >= cfg_.htmpc.replan_interval;
    if (exhausted) {
      d.replanned = replan(snapshot, target);
      // A failed replan may keep following the old reference while it lasts.
      if (!d.replanned && reference_ && offset_ + np > reference_->horizon()) reference_.reset();
    }
    if (!reference_) {
      d.dead_end = true;
      return hold(d, snapshot);
    }
    const double budget = tmpc_.max_evaluations > 0 && !cfg_.wall_clock
                              ? static_cast<double>(tmpc_.max_evaluations) * tmpc_.seconds_per_evaluation
                              : tmpc_.budget_seconds;
    const bool budgeted = cfg_.setup == Setup::kBudgeted;
    // Keep room for the evasive fallback so a decision never exceeds the budget.
    const EvasiveOptions evasive;
    const std::int64_t reserve_evaluations = evasive.grid * evasive.grid;
    const double reserve = static_cast<double>(reserve_evaluations) * tmpc_.seconds_per_evaluation;
    TmpcConfig first = tmpc_;
    if (budgeted && !cfg_.wall_clock) {
      first.max_evaluations = std::max<std::int64_t>(1, tmpc_.max_evaluations - reserve_evaluations);
    }
    TmpcSolution sol = solve_now(snapshot, step, first);
    d.decision_time = sol.solve_time;
    if (!sol.feasible) {
      // The tracker asks the planner for a new reference and tries again.
      ++infeasible_;
      ++triggered_;
      d.infeasible_signals = 1;
      d.replanned = replan(snapshot, target) || d.replanned;
      const double remaining = budget - sol.solve_time - reserve;
      TmpcConfig retry = tmpc_;
      bool affordable = true;
      if (budgeted) {
        affordable = remaining >= 0.1 * budget;
        if (cfg_.wall_clock) {
          retry.budget_seconds = remaining;
        } else {
          retry.max_evaluations = static_cast<std::int64_t>(std::floor(remaining / tmpc_.seconds_per_evaluation + 1e-9));
        }
      }
      if (affordable) {
        TmpcSolution again = solve_now(snapshot, step, retry);
        d.decision_time += again.solve_time;
        if (again.feasible || again.violation < sol.violation) sol = std::move(again);
      }
      if (!sol.feasible) d.fallback = true;
    }
    d.input = sol.inputs.front();
    if (!sol.feasible) {
      // No feasible tracking solution: steer for clearance instead.
      const EvasiveChoice e = evasive_input(snapshot.robot.pose, previous_input_, snapshot,
                                            reference_->states.back().position(), tmpc_);
      d.input = e.input;
      d.decision_time += static_cast<double>(e.evaluations) * tmpc_.seconds_per_evaluation;
      sol.inputs.assign(sol.inputs.size(), e.input);
    }
    d.objective = sol.objective;
    d.feasible = sol.feasible;
    d.violation = sol.violation;
    d.active_constraints = sol.active.size();
    d.robot_tube = sol.robot_tube.empty() ? 0.0 : sol.robot_tube.back();
    d.obstacle_tube = sol.obstacle_tube.empty() ? 0.0 : sol.obstacle_tube.back();
    d.reference = reference_->states[offset_];
    // Receding horizon: keep the tail as the next warm start.
    warm_.assign(sol.inputs.begin() + 1, sol.inputs.end());
    warm_.push_back(sol.inputs.back());
    previous_input_ = d.input;
    ++offset_;
    return d;
  }

 private:
  bool replan(const PerceptionSnapshot& snapshot, const Vec2& target) {
    PlanRequest req;
    req.snapshot = snapshot;
    req.final_target = target;
    req.horizon = tmpc_.horizon;
    req.reference_steps = tmpc_.horizon + cfg_.htmpc.replan_interval;
    req.sampling_time = tmpc_.sampling_time;
    req.safe_radius = tmpc_.safe_radius;
    req.planning_margin = cfg_.htmpc.planning_margin;
    req.lookahead = cfg_.htmpc.planning_lookahead;
    req.bias = {snapshot.robot.pose.theta, cfg_.htmpc.turn_cost};
    req.bounds = tmpc_.bounds;
    req.tube = tmpc_.tube;
    try {
      PlanResult plan = plan_with_dynamics(req, rng_);
      reference_ = std::move(plan.reference);
      plan_radius_ = htmpc::plan_radius(reference_->source_path, snapshot.robot.pose.position(), tmpc_.safe_radius,
                                        tmpc_.plan_radius_floor);
      offset_ = 0;
      ++replans_;
      return true;
    } catch (const InfeasiblePlanError&) {
    } catch (const DeadEndError&) {
    } catch (const GeometryError&) {
    }
    return false;
  }

  TmpcSolution solve_now(const PerceptionSnapshot& snapshot, std::int64_t step, const TmpcConfig& config) {
    TmpcProblem problem;
    problem.current = snapshot.robot;
    problem.previous_input = previous_input_;
    problem.reference = window(*reference_, offset_, tmpc_.horizon);
    problem.snapshot = snapshot;
    problem.plan_radius = plan_radius_;
    problem.step = step;
    if (!warm_.empty()) problem.warm_start = warm_;
    return solve(problem, config, rng_);
  }

  Decision hold(Decision d, const PerceptionSnapshot& snapshot) {
    // Decelerate within the slew limit unless something is closing in.
    const EvasiveOptions opt;
    const EvasiveChoice e = evasive_input(snapshot.robot.pose, previous_input_, snapshot,
                                          snapshot.robot.pose.position(), tmpc_, opt);
    d.decision_time = static_cast<double>(e.evaluations) * tmpc_.seconds_per_evaluation;
    if (e.clearance < opt.comfort) {
      d.input = e.input;
      d.feasible = false;
      d.fallback = true;
      previous_input_ = d.input;
      warm_.clear();
      return d;
    }
    const Input want{0.0, 0.0};
    Input delta = want - previous_input_;
    const double n = std::sqrt(delta.squared_norm());
    if (n > tmpc_.u_smooth && n > 0.0) delta = {delta.v * tmpc_.u_smooth / n, delta.omega * tmpc_.u_smooth / n};
    d.input = tmpc_.bounds.clamp({previous_input_.v + delta.v, previous_input_.omega + delta.omega});
    d.feasible = false;
    previous_input_ = d.input;
    warm_.clear();
    return d;
  }

  ScenarioConfig cfg_;
  Rng rng_;
  TmpcConfig tmpc_;
  std::optional<ReferenceTrajectory> reference_;
  int offset_{0};
  double plan_radius_{1.0};
  Input previous_input_{};
  std::vector<Input> warm_;
  int replans_{0};
  int infeasible_{0};
  int triggered_{0};
};

// ---------------------------------------------------------------------------
// HL-RRT*: periodic replanning, pure-pursuit path following

class HlrrtController final : public Controller {
 public:
  HlrrtController(const ScenarioConfig& cfg, Rng rng) : cfg_(cfg), rng_(std::move(rng)) {
    params_ = cfg.hlrrt.rrt;
    const bool budgeted = cfg.setup == Setup::kBudgeted;
    params_.max_iterations = budgeted ? cfg.hlrrt.budgeted_iterations : cfg.hlrrt.complete_iterations;
    if (budgeted) {
      const int affordable = static_cast<int>(std::floor(cfg.decision_budget / cfg.hlrrt.seconds_per_iteration + 1e-9));
      params_.max_iterations = std::min(params_.max_iterations, affordable);
    }
  }

  std::string name() const override { return "hlrrt"; }
  int replan_count() const override { return replans_; }

  Decision decide(const PerceptionSnapshot& snapshot, const Vec2& target, std::int64_t) override {
    Decision d;
    const Vec2 here = snapshot.robot.pose.position();
    ++since_plan_;
    bool blocked = false;
    if (path_) {
      std::vector<Vec2> obstacles;
      for (const Disc& s : snapshot.visible_static) obstacles.push_back(s.center);
      for (const auto& o : snapshot.visible_dynamic) obstacles.push_back(o.position);
      std::vector<Vec2> rest{here};
      rest.insert(rest.end(), path_->begin() + static_cast<std::ptrdiff_t>(next_), path_->end());
      blocked = !detail::polyline_clear(rest, obstacles, params_.clearance);
    }
    if (!path_ || blocked || since_plan_ >= cfg_.hlrrt.replan_interval) {
      RrtResult r = hlrrt_plan(snapshot, target, params_, rng_);
      d.decision_time = r.iterations * cfg_.hlrrt.seconds_per_iteration;
      d.replanned = true;
      ++replans_;
      since_plan_ = 0;
      path_ = r.path;
      next_ = 1;
    }
    if (!path_ || path_->size() < 2) {
      path_.reset();
      d.input = {0.0, 0.0};  // no improving node: hold position
      return d;
    }
    // Advance past waypoints already reached, then steer to a look-ahead point.
    while (next_ < path_->size() && distance(here, (*path_)[next_]) < 0.5 * cfg_.hlrrt.lookahead) ++next_;
    if (next_ >= path_->size()) {
      path_.reset();
      d.input = {0.0, 0.0};
      return d;
    }
    const Vec2 aim = (*path_)[next_];
    const double c = cfg_.world.sampling_time;
    const double error = normalize_angle((aim - here).angle() - snapshot.robot.pose.theta);
    const double speed = std::min(cfg_.hlrrt.follow_speed, distance(here, path_->back()) / c) *
                         std::max(0.0, std::cos(error));
    d.input = cfg_.htmpc.bounds.clamp({speed, error / c});
    return d;
  }

 private:
  ScenarioConfig cfg_;
  Rng rng_;
  RrtParams params_;
  std::optional<std::vector<Vec2>> path_;
  std::size_t next_{1};
  int since_plan_{0};
  int replans_{0};
};

class ApfController final : public Controller {
 public:
  explicit ApfController(const ScenarioConfig& cfg) : cfg_(cfg) {}
  std::string name() const override { return "apf"; }
  Decision decide(const PerceptionSnapshot& snapshot, const Vec2& target, std::int64_t) override {
    Decision d;
    const Vec2 arena{cfg_.world.arena_width, cfg_.world.arena_height};
    d.input = apf_step(snapshot, target, cfg_.apf.params, cfg_.htmpc.bounds, cfg_.world.sampling_time, arena);
    return d;
  }

 private:
  ScenarioConfig cfg_;
};

inline std::unique_ptr<Controller> make_controller(const ScenarioConfig& cfg, Rng rng) {
  switch (cfg.controller) {
    case ControllerKind::kHtmpc: return std::make_unique<HtmpcController>(cfg, std::move(rng));
    case ControllerKind::kHlrrt: return std::make_unique<HlrrtController>(cfg, std::move(rng));
    case ControllerKind::kApf: return std::make_unique<ApfController>(cfg);
  }
  throw ConfigError("unknown controller");
}

// ---------------------------------------------------------------------------
// Metrics and traces

struct TraceRecord {
  double time{0.0};
  Pose pose;
  Input input;
  std::optional<Pose> reference;
  double min_distance{0.0};
  std::size_t visible_static{0};
  std::size_t visible_dynamic{0};
  std::uint64_t snapshot_digest{0};
  double decision_time{0.0};
  bool replanned{false};
  bool feasible{true};
  double objective{0.0};
  double robot_tube{0.0};
  double obstacle_tube{0.0};
  std::size_t active_constraints{0};
  std::vector<Vec2> obstacles;  // ground-truth dynamic obstacle positions
};

struct RunTrace {
  std::vector<TraceRecord> records;
};

struct RunMetrics {
  std::string scenario;
  std::string controller;
  std::string setup;
  std::uint64_t seed{0};
  bool success{false};
  FailureCause failure{FailureCause::kNone};
  double path_length{0.0};
  double mission_time{0.0};
  double min_obstacle_distance{std::numeric_limits<double>::infinity()};
  std::vector<std::pair<double, double>> min_distance_trace;
  std::vector<double> decision_times;
  int replan_count{0};
  int infeasible_signals{0};
  int triggered_replans{0};  // replans requested on infeasibility signals
  double final_distance{0.0};
};

struct RunResult {
  RunMetrics metrics;
  RunTrace trace;
};

/// True when the best distance to the target improved by no more than
/// `min_improvement` over the trailing window while the robot moved at least
/// `min_motion` within it. `positions` holds one entry per step.
inline bool detect_livelock(const std::vector<Vec2>& positions, const Vec2& target, std::size_t window_steps,
                            double min_improvement = 0.1, double min_motion = 1.0) {
  if (window_steps == 0 || positions.size() <= window_steps) return false;
  const std::size_t first = positions.size() - 1 - window_steps;
  double best_before = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= first; ++i) best_before = std::min(best_before, distance(positions[i], target));
  double best_now = best_before;
  double moved = 0.0;
  for (std::size_t i = first + 1; i < positions.size(); ++i) {
    best_now = std::min(best_now, distance(positions[i], target));
    moved += distance(positions[i], positions[i - 1]);
  }
  return best_before - best_now <= min_improvement && moved >= min_motion;
}

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t digest(const PerceptionSnapshot& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Disc& d : s.visible_static) h = fnv1a(fnv1a(h, d.center.x), d.center.y);
  for (const auto& o : s.visible_dynamic) {
    h = fnv1a(fnv1a(fnv1a(fnv1a(h, o.position.x), o.position.y), o.velocity.x), o.velocity.y);
  }
  return h;
}

}  // namespace detail

/// Stream labels for the independent random sources of one run.
enum class Stream : std::uint64_t { kDisturbance = 1, kPerception = 2, kController = 3 };

inline RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed();
  Rng disturbance = Rng::stream(seed, static_cast<std::uint64_t>(Stream::kDisturbance));
  Rng perception = Rng::stream(seed, static_cast<std::uint64_t>(Stream::kPerception));
  auto controller = make_controller(cfg, Rng::stream(seed, static_cast<std::uint64_t>(Stream::kController)));

  World world(cfg.world);
  const double c = cfg.world.sampling_time;
  RobotState robot;
  robot.pose = {cfg.start.x, cfg.start.y, cfg.start_heading};

  RunResult out;
  RunMetrics& m = out.metrics;
  m.scenario = cfg.id;
  m.controller = to_string(cfg.controller);
  m.setup = to_string(cfg.setup);
  m.seed = seed;
  const auto max_steps = static_cast<std::int64_t>(std::llround(cfg.max_mission_time / c));
  const auto window_steps = static_cast<std::size_t>(std::llround(cfg.livelock.window / c));
  std::vector<Vec2> positions{robot.pose.position()};
  std::optional<std::int64_t> dead_end_since;

  auto record_distance = [&](double t) {
    const double d = world.min_obstacle_distance(robot.pose.position());
    m.min_obstacle_distance = std::min(m.min_obstacle_distance, d);
    m.min_distance_trace.emplace_back(t, d);
    return d;
  };
  double current_distance = record_distance(0.0);
  m.failure = FailureCause::kTimeout;
  for (std::int64_t step = 0;; ++step) {
    const double t = static_cast<double>(step) * c;
    if (current_distance <= cfg.world.collision_distance()) {
      m.failure = FailureCause::kCollision;
      m.mission_time = t;
      break;
    }
    if (distance(robot.pose.position(), cfg.target) <= cfg.arrival_tolerance) {
      m.success = true;
      m.failure = FailureCause::kNone;
      m.mission_time = t;
      break;
    }
    if (detect_livelock(positions, cfg.target, window_steps, cfg.livelock.min_improvement, cfg.livelock.min_motion)) {
      m.failure = FailureCause::kLivelock;
      m.mission_time = t;
      break;
    }
    if (step >= max_steps) {
      m.failure = FailureCause::kTimeout;
      m.mission_time = t;
      break;
    }
    const PerceptionSnapshot snap = perceive(world, robot, perception);
    const Decision d = controller->decide(snap, cfg.target, step);
    if (d.dead_end) {
      if (!dead_end_since) dead_end_since = step;
      if (static_cast<double>(step - *dead_end_since) * c >= cfg.htmpc.dead_end_patience) {
        m.failure = FailureCause::kInfeasible;
        m.mission_time = t;
        break;
      }
    } else {
      dead_end_since.reset();
    }
    m.decision_times.push_back(d.decision_time);
    m.infeasible_signals += d.infeasible_signals;

    TraceRecord rec;
    rec.time = t;
    rec.pose = robot.pose;
    rec.input = d.input;
    rec.reference = d.reference;
    rec.min_distance = current_distance;
    rec.visible_static = snap.visible_static.size();
    rec.visible_dynamic = snap.visible_dynamic.size();
    rec.snapshot_digest = detail::digest(snap);
    rec.decision_time = d.decision_time;
    rec.replanned = d.replanned;
    rec.feasible = d.feasible;
    rec.objective = d.objective;
    rec.robot_tube = d.robot_tube;
    rec.obstacle_tube = d.obstacle_tube;
    rec.active_constraints = d.active_constraints;
    for (const auto& o : world.dynamic_obstacles()) rec.obstacles.push_back(o.position);
    out.trace.records.push_back(std::move(rec));

    const Vec2 before = robot.pose.position();
    robot = step_robot_truth(robot, d.input, c, cfg.world.disturbance_bound, disturbance);
    world.advance();
    m.path_length += distance(before, robot.pose.position());
    positions.push_back(robot.pose.position());
    current_distance = record_distance(t + c);
  }
  m.replan_count = controller->replan_count();
  m.triggered_replans = controller->triggered_replans();
  m.final_distance = distance(robot.pose.position(), cfg.target);
  return out;
}

/// Runs configurations on a pool of worker threads; results keep input order.
inline std::vector<RunResult> run_batch(const std::vector<ScenarioConfig>& configs, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, configs.size())));
  std::vector<RunResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_scenario(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Aggregation

struct Statistic {
  std::optional<double> mean;
  std::optional<double> stddev;  // sample standard deviation; needs two values
};

inline Statistic summarize(const std::vector<double>& v) {
  Statistic s;
  if (v.empty()) return s;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.mean = mean;
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

struct ControllerSummary {
  std::string controller;
  std::string setup;
  int runs{0};
  int successes{0};
  std::map<std::string, int> failures;
  Statistic path_length;
  Statistic mission_time;
};

/// Per controller and setup: success count and statistics over successful runs.
inline std::vector<ControllerSummary> aggregate(const std::vector<RunMetrics>& results) {
  if (results.empty()) throw ConfigError("aggregate: no results");
  std::map<std::pair<std::string, std::string>, std::vector<const RunMetrics*>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : results) {
    auto key = std::make_pair(r.controller, r.setup);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<ControllerSummary> out;
  for (const auto& key : order) {
    ControllerSummary s;
    s.controller = key.first;
    s.setup = key.second;
    std::vector<double> lengths;
    std::vector<double> times;
    for (const RunMetrics* r : groups[key]) {
      ++s.runs;
      if (r->success) {
        ++s.successes;
        lengths.push_back(r->path_length);
        times.push_back(r->mission_time);
      } else {
        ++s.failures[to_string(r->failure)];
      }
    }
    s.path_length = summarize(lengths);
    s.mission_time = summarize(times);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string opt(const std::optional<double>& v) { return v ? num(*v) : "-"; }

}  // namespace detail

inline std::string summary_header() {
  return "scenario,controller,setup,seed,success,failure,path_length,mission_time,min_obstacle_distance,"
         "replans,infeasible_signals,max_decision_time,final_distance";
}

inline std::string summary_row(const RunMetrics& m) {
  const double max_decision =
      m.decision_times.empty() ? 0.0 : *std::max_element(m.decision_times.begin(), m.decision_times.end());
  std::ostringstream os;
  os << m.scenario << ',' << m.controller << ',' << m.setup << ',' << m.seed << ',' << (m.success ? 1 : 0) << ','
     << to_string(m.failure) << ',' << detail::num(m.path_length) << ',' << detail::num(m.mission_time) << ','
     << detail::num(m.min_obstacle_distance) << ',' << m.replan_count << ',' << m.infeasible_signals << ','
     << detail::num(max_decision) << ',' << detail::num(m.final_distance);
  return os.str();
}

inline std::string trace_csv(const RunTrace& trace) {
  std::ostringstream os;
  os << "t,x,y,theta,v,omega,ref_x,ref_y,ref_theta,min_distance,visible_static,visible_dynamic,snapshot_digest,"
        "decision_time,replanned,feasible,objective,robot_tube,obstacle_tube,active_constraints,obstacles\n";
  for (const auto& r : trace.records) {
    os << detail::num(r.time) << ',' << detail::num(r.pose.x) << ',' << detail::num(r.pose.y) << ','
       << detail::num(r.pose.theta) << ',' << detail::num(r.input.v) << ',' << detail::num(r.input.omega) << ',';
    if (r.reference) {
      os << detail::num(r.reference->x) << ',' << detail::num(r.reference->y) << ',' << detail::num(r.reference->theta);
    } else {
      os << ",,";
    }
    os << ',' << detail::num(r.min_distance) << ',' << r.visible_static << ',' << r.visible_dynamic << ','
       << r.snapshot_digest << ',' << detail::num(r.decision_time) << ',' << (r.replanned ? 1 : 0) << ','
       << (r.feasible ? 1 : 0) << ',' << detail::num(r.objective) << ',' << detail::num(r.robot_tube) << ','
       << detail::num(r.obstacle_tube) << ',' << r.active_constraints << ',';
    for (std::size_t i = 0; i < r.obstacles.size(); ++i) {
      if (i) os << ';';
      os << detail::num(r.obstacles[i].x) << ':' << detail::num(r.obstacles[i].y);
    }
    os << '\n';
  }
  return os.str();
}

inline std::string summary_table(const std::vector<ControllerSummary>& s) {
  std::ostringstream os;
  os << "controller,setup,runs,successes,path_mean,path_std,time_mean,time_std,failures\n";
  for (const auto& x : s) {
    os << x.controller << ',' << x.setup << ',' << x.runs << ',' << x.successes << ',' << detail::opt(x.path_length.mean)
       << ',' << detail::opt(x.path_length.stddev) << ',' << detail::opt(x.mission_time.mean) << ','
       << detail::opt(x.mission_time.stddev) << ',';
    bool first = true;
    for (const auto& [cause, n] : x.failures) {
      if (!first) os << ';';
      os << cause << ':' << n;
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

/// Writes summary.csv (one row per run) and, when `traces` is set, one
/// trace file per run into `directory`.
inline void emit_results(const std::vector<RunResult>& results, const std::string& directory, bool traces = true) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  std::ofstream summary(fs::path(directory) / "summary.csv");
  if (!summary) throw ConfigError("emit_results: cannot write to " + directory);
  summary << summary_header() << '\n';
  for (const auto& r : results) {
    summary << summary_row(r.metrics) << '\n';
    if (traces) {
      const std::string name = r.metrics.scenario + "_" + r.metrics.controller + "_" + r.metrics.setup + "_s" +
                               std::to_string(r.metrics.seed) + ".csv";
      std::ofstream t(fs::path(directory) / name);
      t << trace_csv(r.trace);
    }
  }
}

}  // namespace htmpc

#endif  // HTMPC_HARNESS_HPP_
