#ifndef HTMPC_SCENARIO_HPP_
#define HTMPC_SCENARIO_HPP_

// Scenario files: YAML with a versioned schema. Every hyperparameter the
// experiments depend on lives in the file so that a run is reproducible from
// it alone. Doubles are written with 17 significant digits, which makes
// load(emit(config)) bit-identical.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "htmpc/baselines/apf.hpp"
#include "htmpc/baselines/rrt.hpp"
#include "htmpc/errors.hpp"
#include "htmpc/tmpc.hpp"
#include "htmpc/world.hpp"

namespace htmpc {

inline constexpr int kSchemaVersion = 1;

enum class ControllerKind { kHtmpc, kHlrrt, kApf };
enum class Setup { kBudgeted, kRunToCompletion };

inline const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::kHtmpc: return "htmpc";
    case ControllerKind::kHlrrt: return "hlrrt";
    case ControllerKind::kApf: return "apf";
  }
  return "?";
}

inline const char* to_string(Setup s) { return s == Setup::kBudgeted ? "budgeted" : "run-to-completion"; }

struct HtmpcParams {
  int horizon{5};
  int control_horizon{5};
  double w1{0.9};
  double w2{0.01};
  DiscountMode discount{DiscountMode::kPerStep};
  InputBounds bounds{{-0.2, -1.5}, {1.0, 1.5}};
  double u_smooth{0.5};
  double safe_radius{0.7};
  double planning_margin{0.05};
  int planning_lookahead{20};     // prediction steps checked by the planner (>= horizon)
  double turn_cost{0.35};         // m per rad of initial turn when choosing a side
  TubeParams tube;
  double penalty{1e3};
  int starts{4};
  int replan_interval{5};
  std::int64_t budgeted_evaluations{555};  // 0.15 s at the modeled cost below
  std::int64_t complete_evaluations{20000};
  double seconds_per_evaluation{2.7e-4};
  double dead_end_patience{10.0};  // s of consecutive planning failures before giving up

  bool operator==(const HtmpcParams&) const = default;
};

struct HlrrtParams {
  RrtParams rrt;
  int budgeted_iterations{150};
  int complete_iterations{1500};
  double seconds_per_iteration{1e-3};
  int replan_interval{5};
  double follow_speed{0.5};
  double lookahead{0.5};

  bool operator==(const HlrrtParams&) const = default;
};

struct ApfConfig {
  std::string tuning{"retuned"};
  ApfParams params;

  bool operator==(const ApfConfig&) const = default;
};

struct LivelockParams {
  double window{15.0};
  double min_improvement{0.1};
  double min_motion{1.0};

  bool operator==(const LivelockParams&) const = default;
};

struct ScenarioConfig {
  std::string id{"scenario"};
  std::string case_label{"case1"};
  std::string note;
  WorldConfig world;
  Vec2 start;
  double start_heading{0.0};
  Vec2 target;
  ControllerKind controller{ControllerKind::kHtmpc};
  Setup setup{Setup::kBudgeted};
  bool wall_clock{false};  // measure budgets on the wall clock instead of modeled evaluation cost
  double decision_budget{0.15};
  double max_mission_time{120.0};
  double arrival_tolerance{0.2};
  LivelockParams livelock;
  HtmpcParams htmpc;
  HlrrtParams hlrrt;
  ApfConfig apf;

  std::uint64_t seed() const { return world.rng_seed; }
  bool operator==(const ScenarioConfig&) const = default;

  void validate() const {
    world.validate();
    auto inside = [&](const Vec2& p) {
      return p.x >= 0.0 && p.x <= world.arena_width && p.y >= 0.0 && p.y <= world.arena_height;
    };
    if (!inside(start) || !inside(target)) throw ConfigError("scenario: start and target must lie in the arena");
    const double r = htmpc.safe_radius;
    for (const Vec2& c : world.static_obstacles) {
      if (distance(c, start) <= r || distance(c, target) <= r) {
        throw ConfigError("scenario: start or target inside an inflated obstacle");
      }
    }
    for (const auto& o : world.dynamic_obstacles) {
      if (distance(o.position, start) <= r) throw ConfigError("scenario: start inside an inflated obstacle");
    }
    if (setup == Setup::kBudgeted && !(decision_budget > 0.0)) throw ConfigError("scenario: budget must be positive");
    if (!(max_mission_time > 0.0) || !(arrival_tolerance > 0.0)) throw ConfigError("scenario: invalid limits");
    if (htmpc.safe_radius < world.robot_radius + world.obstacle_radius) {
      throw ConfigError("scenario: safe radius below robot plus obstacle radius");
    }
    if (htmpc.replan_interval < 1 || htmpc.horizon < 1 || htmpc.control_horizon < 1 ||
        htmpc.control_horizon > htmpc.horizon) {
      throw ConfigError("scenario: invalid horizons");
    }
    apf.params.validate();
  }
};

// ---------------------------------------------------------------------------
// Reading

namespace detail {

/// A YAML node with its dotted path, so errors can name the offending field.
class Field {
 public:
  Field(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  int line() const { return node_.Mark().line >= 0 ? node_.Mark().line + 1 : 0; }
  const YAML::Node& node() const { return node_; }

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_, line(), what); }

  bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull(); }

  Field operator[](const std::string& key) const {
    if (!node_.IsMap()) fail("expected a mapping");
    const YAML::Node child = node_[key];
    const std::string p = path_.empty() ? key : path_ + "." + key;
    if (!child.IsDefined() || child.IsNull()) throw SchemaError(p, line(), "required field is missing");
    return Field(child, p);
  }

  Field at(std::size_t i) const { return Field(node_[i], path_ + "[" + std::to_string(i) + "]"); }

  std::size_t size() const {
    if (!node_.IsSequence()) fail("expected a sequence");
    return node_.size();
  }

  template <typename T>
  T as() const {
    if (!node_.IsScalar()) fail("expected a scalar");
    try {
      return node_.as<T>();
    } catch (const YAML::Exception&) {
      fail("value has the wrong type");
    }
  }

  template <typename T>
  T get(const std::string& key) const {
    return (*this)[key].as<T>();
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    return has(key) ? (*this)[key].as<T>() : fallback;
  }

  Vec2 vec2() const {
    if (!node_.IsSequence() || node_.size() != 2) fail("expected [x, y]");
    return {at(0).as<double>(), at(1).as<double>()};
  }

 private:
  YAML::Node node_;
  std::string path_;
};

inline InputBounds read_bounds(const Field& f, InputBounds b) {
  b.min.v = f.get_or("v_min", b.min.v);
  b.max.v = f.get_or("v_max", b.max.v);
  b.min.omega = f.get_or("omega_min", b.min.omega);
  b.max.omega = f.get_or("omega_max", b.max.omega);
  return b;
}

inline TubeParams read_tube(const Field& f, TubeParams t) {
  t.robot_bound = f.get_or("robot_bound", t.robot_bound);
  t.robot_damping = f.get_or("robot_damping", t.robot_damping);
  t.obstacle_bound = f.get_or("obstacle_bound", t.obstacle_bound);
  t.obstacle_damping = f.get_or("obstacle_damping", t.obstacle_damping);
  return t;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const YAML::Node& root_node) {
  const detail::Field root(root_node, "");
  if (!root_node.IsMap()) root.fail("scenario must be a mapping");
  ScenarioConfig cfg;
  const int version = root.get<int>("schema_version");
  if (version != kSchemaVersion) root["schema_version"].fail("unsupported schema version");
  cfg.id = root.get<std::string>("id");
  cfg.case_label = root.get_or<std::string>("case", cfg.case_label);
  cfg.note = root.get_or<std::string>("note", "");

  const auto w = root["world"];
  const auto arena = w["arena"];
  cfg.world.arena_width = arena.get<double>("width");
  cfg.world.arena_height = arena.get<double>("height");
  cfg.world.obstacle_radius = w.get<double>("obstacle_radius");
  cfg.world.robot_radius = w.get<double>("robot_radius");
  cfg.world.perception_radius = w.get<double>("perception_radius");
  cfg.world.disturbance_bound = w.get<double>("disturbance_bound");
  cfg.world.perception_error_bound = w.get<double>("perception_error_bound");
  cfg.world.sampling_time = w.get<double>("sampling_time");
  const auto statics = w["static_obstacles"];
  for (std::size_t i = 0; i < statics.size(); ++i) cfg.world.static_obstacles.push_back(statics.at(i).vec2());
  const auto dyn = w["dynamic_obstacles"];
  for (std::size_t i = 0; i < dyn.size(); ++i) {
    const auto o = dyn.at(i);
    DynamicObstacleState s;
    s.position = o["position"].vec2();
    s.velocity = o["velocity"].vec2();
    s.attraction = o["attraction"].vec2();
    s.alpha = o.get<double>("alpha");
    s.beta = o.get<double>("beta");
    cfg.world.dynamic_obstacles.push_back(s);
  }
  cfg.world.rng_seed = root.get<std::uint64_t>("rng_seed");

  cfg.start = root["start"].vec2();
  cfg.start_heading = root.get_or("start_heading", 0.0);
  cfg.target = root["target"].vec2();

  const std::string controller = root.get_or<std::string>("controller", "htmpc");
  if (controller == "htmpc") cfg.controller = ControllerKind::kHtmpc;
  else if (controller == "hlrrt") cfg.controller = ControllerKind::kHlrrt;
  else if (controller == "apf") cfg.controller = ControllerKind::kApf;
  else root["controller"].fail("expected htmpc, hlrrt or apf");
  const std::string setup = root.get_or<std::string>("setup", "budgeted");
  if (setup == "budgeted") cfg.setup = Setup::kBudgeted;
  else if (setup == "run-to-completion") cfg.setup = Setup::kRunToCompletion;
  else root["setup"].fail("expected budgeted or run-to-completion");
  cfg.wall_clock = root.get_or("wall_clock", false);
  cfg.decision_budget = root.get_or("decision_budget", cfg.decision_budget);
  cfg.max_mission_time = root.get_or("max_mission_time", cfg.max_mission_time);
  cfg.arrival_tolerance = root.get_or("arrival_tolerance", cfg.arrival_tolerance);
  if (root.has("livelock")) {
    const auto l = root["livelock"];
    cfg.livelock.window = l.get_or("window", cfg.livelock.window);
    cfg.livelock.min_improvement = l.get_or("min_improvement", cfg.livelock.min_improvement);
    cfg.livelock.min_motion = l.get_or("min_motion", cfg.livelock.min_motion);
  }

  if (root.has("htmpc")) {
    const auto h = root["htmpc"];
    auto& p = cfg.htmpc;
    p.horizon = h.get_or("horizon", p.horizon);
    p.control_horizon = h.get_or("control_horizon", p.control_horizon);
    p.w1 = h.get_or("w1", p.w1);
    p.w2 = h.get_or("w2", p.w2);
    const std::string discount = h.get_or<std::string>("discount", "per-step");
    if (discount == "per-step") p.discount = DiscountMode::kPerStep;
    else if (discount == "paper-exponent") p.discount = DiscountMode::kPaperExponent;
    else h["discount"].fail("expected per-step or paper-exponent");
    if (h.has("bounds")) p.bounds = detail::read_bounds(h["bounds"], p.bounds);
    p.u_smooth = h.get_or("u_smooth", p.u_smooth);
    p.safe_radius = h.get_or("safe_radius", p.safe_radius);
    p.planning_margin = h.get_or("planning_margin", p.planning_margin);
    p.planning_lookahead = h.get_or("planning_lookahead", p.planning_lookahead);
    p.turn_cost = h.get_or("turn_cost", p.turn_cost);
    if (h.has("tube")) p.tube = detail::read_tube(h["tube"], p.tube);
    p.penalty = h.get_or("penalty", p.penalty);
    p.starts = h.get_or("starts", p.starts);
    p.replan_interval = h.get_or("replan_interval", p.replan_interval);
    p.budgeted_evaluations = h.get_or("budgeted_evaluations", p.budgeted_evaluations);
    p.complete_evaluations = h.get_or("complete_evaluations", p.complete_evaluations);
    p.seconds_per_evaluation = h.get_or("seconds_per_evaluation", p.seconds_per_evaluation);
    p.dead_end_patience = h.get_or("dead_end_patience", p.dead_end_patience);
  }
  if (root.has("hlrrt")) {
    const auto h = root["hlrrt"];
    auto& p = cfg.hlrrt;
    p.rrt.horizon_radius = h.get_or("horizon_radius", p.rrt.horizon_radius);
    p.rrt.step = h.get_or("step", p.rrt.step);
    p.rrt.neighbor_radius = h.get_or("neighbor_radius", p.rrt.neighbor_radius);
    p.rrt.goal_bias = h.get_or("goal_bias", p.rrt.goal_bias);
    p.rrt.horizon_bias = h.get_or("horizon_bias", p.rrt.horizon_bias);
    p.rrt.horizon_spread = h.get_or("horizon_spread", p.rrt.horizon_spread);
    p.rrt.clearance = h.get_or("clearance", p.rrt.clearance);
    p.budgeted_iterations = h.get_or("budgeted_iterations", p.budgeted_iterations);
    p.complete_iterations = h.get_or("complete_iterations", p.complete_iterations);
    p.seconds_per_iteration = h.get_or("seconds_per_iteration", p.seconds_per_iteration);
    p.replan_interval = h.get_or("replan_interval", p.replan_interval);
    p.follow_speed = h.get_or("follow_speed", p.follow_speed);
    p.lookahead = h.get_or("lookahead", p.lookahead);
  }
  if (root.has("apf")) {
    const auto a = root["apf"];
    auto& p = cfg.apf;
    p.tuning = a.get_or<std::string>("tuning", p.tuning);
    p.params.attraction_gain = a.get_or("attraction_gain", p.params.attraction_gain);
    p.params.repulsion_gain = a.get_or("repulsion_gain", p.params.repulsion_gain);
    p.params.influence_radius = a.get_or("influence_radius", p.params.influence_radius);
    p.params.horizon_steps = a.get_or("horizon_steps", p.params.horizon_steps);
    p.params.speed_gain = a.get_or("speed_gain", p.params.speed_gain);
    p.params.heading_gain = a.get_or("heading_gain", p.params.heading_gain);
    p.params.min_force = a.get_or("min_force", p.params.min_force);
    p.params.slow_in_turns = a.get_or("slow_in_turns", p.params.slow_in_turns);
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw SchemaError("", 0, e.what());
  }
  return cfg;
}

inline ScenarioConfig load_scenario_string(const std::string& text) {
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SchemaError("", e.mark.line + 1, std::string("malformed YAML: ") + e.msg);
  }
  return parse_scenario(node);
}

inline ScenarioConfig load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open scenario file " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_string(ss.str());
}

// ---------------------------------------------------------------------------
// Writing

namespace detail {

inline void emit_vec(YAML::Emitter& out, const Vec2& v) {
  out << YAML::Flow << YAML::BeginSeq << v.x << v.y << YAML::EndSeq;
}

}  // namespace detail

inline std::string emit_scenario(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << kSchemaVersion;
  out << YAML::Key << "id" << YAML::Value << cfg.id;
  out << YAML::Key << "case" << YAML::Value << cfg.case_label;
  if (!cfg.note.empty()) out << YAML::Key << "note" << YAML::Value << cfg.note;
  out << YAML::Key << "rng_seed" << YAML::Value << cfg.world.rng_seed;
  out << YAML::Key << "start" << YAML::Value;
  detail::emit_vec(out, cfg.start);
  out << YAML::Key << "start_heading" << YAML::Value << cfg.start_heading;
  out << YAML::Key << "target" << YAML::Value;
  detail::emit_vec(out, cfg.target);
  out << YAML::Key << "controller" << YAML::Value << to_string(cfg.controller);
  out << YAML::Key << "setup" << YAML::Value << to_string(cfg.setup);
  out << YAML::Key << "wall_clock" << YAML::Value << cfg.wall_clock;
  out << YAML::Key << "decision_budget" << YAML::Value << cfg.decision_budget;
  out << YAML::Key << "max_mission_time" << YAML::Value << cfg.max_mission_time;
  out << YAML::Key << "arrival_tolerance" << YAML::Value << cfg.arrival_tolerance;
  out << YAML::Key << "livelock" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "window" << YAML::Value << cfg.livelock.window;
  out << YAML::Key << "min_improvement" << YAML::Value << cfg.livelock.min_improvement;
  out << YAML::Key << "min_motion" << YAML::Value << cfg.livelock.min_motion;
  out << YAML::EndMap;

  const WorldConfig& w = cfg.world;
  out << YAML::Key << "world" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "arena" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "width" << YAML::Value
      << w.arena_width << YAML::Key << "height" << YAML::Value << w.arena_height << YAML::EndMap;
  out << YAML::Key << "obstacle_radius" << YAML::Value << w.obstacle_radius;
  out << YAML::Key << "robot_radius" << YAML::Value << w.robot_radius;
  out << YAML::Key << "perception_radius" << YAML::Value << w.perception_radius;
  out << YAML::Key << "disturbance_bound" << YAML::Value << w.disturbance_bound;
  out << YAML::Key << "perception_error_bound" << YAML::Value << w.perception_error_bound;
  out << YAML::Key << "sampling_time" << YAML::Value << w.sampling_time;
  out << YAML::Key << "static_obstacles" << YAML::Value << YAML::BeginSeq;
  for (const Vec2& c : w.static_obstacles) detail::emit_vec(out, c);
  out << YAML::EndSeq;
  out << YAML::Key << "dynamic_obstacles" << YAML::Value << YAML::BeginSeq;
  for (const auto& o : w.dynamic_obstacles) {
    out << YAML::BeginMap;
    out << YAML::Key << "position" << YAML::Value;
    detail::emit_vec(out, o.position);
    out << YAML::Key << "velocity" << YAML::Value;
    detail::emit_vec(out, o.velocity);
    out << YAML::Key << "attraction" << YAML::Value;
    detail::emit_vec(out, o.attraction);
    out << YAML::Key << "alpha" << YAML::Value << o.alpha;
    out << YAML::Key << "beta" << YAML::Value << o.beta;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;

  const HtmpcParams& h = cfg.htmpc;
  out << YAML::Key << "htmpc" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "horizon" << YAML::Value << h.horizon;
  out << YAML::Key << "control_horizon" << YAML::Value << h.control_horizon;
  out << YAML::Key << "w1" << YAML::Value << h.w1;
  out << YAML::Key << "w2" << YAML::Value << h.w2;
  out << YAML::Key << "discount" << YAML::Value
      << (h.discount == DiscountMode::kPerStep ? "per-step" : "paper-exponent");
  out << YAML::Key << "bounds" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "v_min" << YAML::Value << h.bounds.min.v << YAML::Key << "v_max" << YAML::Value << h.bounds.max.v;
  out << YAML::Key << "omega_min" << YAML::Value << h.bounds.min.omega << YAML::Key << "omega_max" << YAML::Value
      << h.bounds.max.omega;
  out << YAML::EndMap;
  out << YAML::Key << "u_smooth" << YAML::Value << h.u_smooth;
  out << YAML::Key << "safe_radius" << YAML::Value << h.safe_radius;
  out << YAML::Key << "planning_margin" << YAML::Value << h.planning_margin;
  out << YAML::Key << "planning_lookahead" << YAML::Value << h.planning_lookahead;
  out << YAML::Key << "turn_cost" << YAML::Value << h.turn_cost;
  out << YAML::Key << "tube" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "robot_bound" << YAML::Value << h.tube.robot_bound;
  out << YAML::Key << "robot_damping" << YAML::Value << h.tube.robot_damping;
  out << YAML::Key << "obstacle_bound" << YAML::Value << h.tube.obstacle_bound;
  out << YAML::Key << "obstacle_damping" << YAML::Value << h.tube.obstacle_damping;
  out << YAML::EndMap;
  out << YAML::Key << "penalty" << YAML::Value << h.penalty;
  out << YAML::Key << "starts" << YAML::Value << h.starts;
  out << YAML::Key << "replan_interval" << YAML::Value << h.replan_interval;
  out << YAML::Key << "budgeted_evaluations" << YAML::Value << h.budgeted_evaluations;
  out << YAML::Key << "complete_evaluations" << YAML::Value << h.complete_evaluations;
  out << YAML::Key << "seconds_per_evaluation" << YAML::Value << h.seconds_per_evaluation;
  out << YAML::Key << "dead_end_patience" << YAML::Value << h.dead_end_patience;
  out << YAML::EndMap;

  const HlrrtParams& r = cfg.hlrrt;
  out << YAML::Key << "hlrrt" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "horizon_radius" << YAML::Value << r.rrt.horizon_radius;
  out << YAML::Key << "step" << YAML::Value << r.rrt.step;
  out << YAML::Key << "neighbor_radius" << YAML::Value << r.rrt.neighbor_radius;
  out << YAML::Key << "goal_bias" << YAML::Value << r.rrt.goal_bias;
  out << YAML::Key << "horizon_bias" << YAML::Value << r.rrt.horizon_bias;
  out << YAML::Key << "horizon_spread" << YAML::Value << r.rrt.horizon_spread;
  out << YAML::Key << "clearance" << YAML::Value << r.rrt.clearance;
  out << YAML::Key << "budgeted_iterations" << YAML::Value << r.budgeted_iterations;
  out << YAML::Key << "complete_iterations" << YAML::Value << r.complete_iterations;
  out << YAML::Key << "seconds_per_iteration" << YAML::Value << r.seconds_per_iteration;
  out << YAML::Key << "replan_interval" << YAML::Value << r.replan_interval;
  out << YAML::Key << "follow_speed" << YAML::Value << r.follow_speed;
  out << YAML::Key << "lookahead" << YAML::Value << r.lookahead;
  out << YAML::EndMap;

  const ApfConfig& a = cfg.apf;
  out << YAML::Key << "apf" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tuning" << YAML::Value << a.tuning;
  out << YAML::Key << "attraction_gain" << YAML::Value << a.params.attraction_gain;
  out << YAML::Key << "repulsion_gain" << YAML::Value << a.params.repulsion_gain;
  out << YAML::Key << "influence_radius" << YAML::Value << a.params.influence_radius;
  out << YAML::Key << "horizon_steps" << YAML::Value << a.params.horizon_steps;
  out << YAML::Key << "speed_gain" << YAML::Value << a.params.speed_gain;
  out << YAML::Key << "heading_gain" << YAML::Value << a.params.heading_gain;
  out << YAML::Key << "min_force" << YAML::Value << a.params.min_force;
  out << YAML::Key << "slow_in_turns" << YAML::Value << a.params.slow_in_turns;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

inline void save_scenario(const ScenarioConfig& cfg, const std::string& file) {
  std::ofstream outf(file);
  if (!outf) throw ConfigError("cannot write scenario file " + file);
  outf << emit_scenario(cfg);
}

}  // namespace htmpc

#endif  // HTMPC_SCENARIO_HPP_
