#ifndef HTMPC_PLANNER_HPP_
#define HTMPC_PLANNER_HPP_

// Heuristic obstacle-avoiding shortest-path planner. Candidate paths are
// built from tangents and arcs of the (inflated) circular obstacles on both
// sides of the straight line to the target. Dynamic obstacles enter as the
// sets of discs they are predicted to occupy; predicted discs that conflict
// with the time-indexed robot positions are merged into obstacle belts and the
// path is planned again until it is conflict-free.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "htmpc/errors.hpp"
#include "htmpc/geometry.hpp"
#include "htmpc/kinematics.hpp"
#include "htmpc/rng.hpp"
#include "htmpc/tangent_graph.hpp"
#include "htmpc/tube.hpp"
#include "htmpc/world.hpp"

namespace htmpc {

enum class Side { kLeft, kRight };

/// Reference speed: the larger of half the top speed and the midpoint of the
/// admissible speed interval.
inline double reference_speed(const InputBounds& bounds) {
  if (bounds.min.v > bounds.max.v) throw ConfigError("reference_speed: v_min > v_max");
  return std::max(0.5 * bounds.max.v, 0.5 * (bounds.min.v + bounds.max.v));
}

// ---------------------------------------------------------------------------
// Static planning

struct StaticPlan {
  GeometricPath path;
  std::optional<GeometricPath> left;
  std::optional<GeometricPath> right;
  Side chosen{Side::kLeft};
  bool tie{false};
  std::optional<std::size_t> first_blocker;
};

/// Index of the first disc the straight segment enters, by entry parameter.
inline std::optional<std::size_t> first_blocking_disc(const Vec2& start, const Vec2& target,
                                                      const std::vector<Disc>& discs) {
  std::optional<std::size_t> best;
  double best_t = 2.0;
  for (std::size_t i = 0; i < discs.size(); ++i) {
    if (auto t = segment_entry({start, target}, discs[i]); t && *t < best_t) {
      best_t = *t;
      best = i;
    }
  }
  return best;
}

/// Shortest paths passing the first blocking obstacle on its left and on its
/// right; the shorter one wins and exact ties are broken by a coin flip.
/// `discs` are already inflated forbidden regions.
/// Optional preference for candidates that leave in the robot's current
/// heading: each radian of initial turn costs `turn_cost` meters.
struct HeadingBias {
  double heading{0.0};
  double turn_cost{0.0};
};

inline StaticPlan plan_static(const Vec2& start, const Vec2& target, const std::vector<Disc>& discs, Rng& rng,
                              const HeadingBias& bias = {}) {
  for (const Disc& d : discs) {
    if (d.contains(start)) throw InfeasiblePlanError("plan_static: start inside a forbidden region");
    if (d.contains(target)) throw InfeasiblePlanError("plan_static: target inside a forbidden region");
  }
  StaticPlan plan;
  plan.first_blocker = first_blocking_disc(start, target, discs);
  if (!plan.first_blocker) {
    plan.path = GeometricPath::straight(start, target);
    plan.left = plan.path;
    plan.right = plan.path;
    return plan;
  }
  const Disc& blocker = discs[*plan.first_blocker];
  const Vec2 u = (target - start).normalized();
  const Vec2 right_normal{u.y, -u.x};
  const double reach = 1e4;
  // A ray from the blocker toward one side forbids passing on that side.
  const Segment block_right{blocker.center, blocker.center + right_normal * reach};
  const Segment block_left{blocker.center, blocker.center - right_normal * reach};
  plan.left = shortest_path(start, target, discs, {block_right});
  plan.right = shortest_path(start, target, discs, {block_left});
  if (!plan.left && !plan.right) throw InfeasiblePlanError("plan_static: no traversable path");
  if (plan.left && plan.right) {
    auto cost = [&](const GeometricPath& p) {
      const double turn = std::abs(normalize_angle(p.tangent_at(0.0).angle() - bias.heading));
      return p.length() + bias.turn_cost * turn;
    };
    const double ll = cost(*plan.left);
    const double lr = cost(*plan.right);
    if (std::abs(ll - lr) <= kGeomTol) {
      plan.tie = true;
      plan.chosen = rng.coin() ? Side::kLeft : Side::kRight;
    } else {
      plan.chosen = ll < lr ? Side::kLeft : Side::kRight;
    }
  } else {
    plan.chosen = plan.left ? Side::kLeft : Side::kRight;
  }
  plan.path = plan.chosen == Side::kLeft ? *plan.left : *plan.right;
  return plan;
}

/// Convenience overload over a perception snapshot: every visible static
/// obstacle becomes a forbidden disc of radius `safe_radius` about its center.
inline GeometricPath plan_static(const PerceptionSnapshot& snapshot, const Vec2& start, const Vec2& target,
                                 double safe_radius, Rng& rng) {
  std::vector<Disc> discs;
  for (const Disc& d : snapshot.visible_static) discs.push_back({d.center, safe_radius});
  return plan_static(start, target, discs, rng).path;
}

// ---------------------------------------------------------------------------
// Tangent chains and smoothing

/// A circle the path goes around, and the sense of travel around it.
struct Wrap {
  Disc disc;
  Orientation orientation;
};

namespace detail {

inline std::optional<Vec2> touch_from_point(const Vec2& p, const Disc& d, Orientation o) {
  if (distance(p, d.center) <= d.radius + kGeomTol) return std::nullopt;
  for (const auto& [q, t] : point_tangents(p, d)) {
    if (travel_orientation(t, d.center, t - q) == o) return t;
  }
  return std::nullopt;
}

inline std::optional<Vec2> touch_to_point(const Disc& d, Orientation o, const Vec2& p) {
  if (distance(p, d.center) <= d.radius + kGeomTol) return std::nullopt;
  for (const auto& [q, t] : point_tangents(p, d)) {
    if (travel_orientation(t, d.center, q - t) == o) return t;
  }
  return std::nullopt;
}

inline std::optional<std::pair<Vec2, Vec2>> touch_between(const Wrap& a, const Wrap& b) {
  if (distance(a.disc.center, b.disc.center) <= kGeomTol) return std::nullopt;
  for (const auto& [p, q] : tangent_lines(a.disc, b.disc)) {
    const Vec2 d = q - p;
    if (d.norm() <= kGeomTol) continue;
    if (travel_orientation(p, a.disc.center, d) == a.orientation &&
        travel_orientation(q, b.disc.center, d) == b.orientation) {
      return std::make_pair(p, q);
    }
  }
  return std::nullopt;
}

struct Chain {
  GeometricPath path;
  // For each element of `path`: the gap index for segments (segment k joins
  // wrap k-1 to wrap k), or -(wrap index) - 1 for arcs.
  std::vector<int> tags;
};

}  // namespace detail

/// Tangent-arc path from `a` to `b` going around `wraps` in order. Returns
/// nullopt when a required tangent does not exist.
inline std::optional<detail::Chain> build_chain(const Vec2& a, const std::vector<Wrap>& wraps, const Vec2& b) {
  detail::Chain chain;
  if (wraps.empty()) {
    chain.path = GeometricPath::straight(a, b);
    chain.tags = {0};
    return chain;
  }
  std::vector<Vec2> arrive(wraps.size());
  std::vector<Vec2> depart(wraps.size());
  auto first = detail::touch_from_point(a, wraps.front().disc, wraps.front().orientation);
  auto last = detail::touch_to_point(wraps.back().disc, wraps.back().orientation, b);
  if (!first || !last) return std::nullopt;
  arrive.front() = *first;
  depart.back() = *last;
  for (std::size_t i = 0; i + 1 < wraps.size(); ++i) {
    auto t = detail::touch_between(wraps[i], wraps[i + 1]);
    if (!t) return std::nullopt;
    depart[i] = t->first;
    arrive[i + 1] = t->second;
  }
  std::vector<PathElement> el;
  Vec2 cursor = a;
  for (std::size_t i = 0; i < wraps.size(); ++i) {
    el.emplace_back(Segment{cursor, arrive[i]});
    chain.tags.push_back(static_cast<int>(i));
    const Disc& d = wraps[i].disc;
    const Arc arc = Arc::from_angles(d, (arrive[i] - d.center).angle(), (depart[i] - d.center).angle(),
                                     wraps[i].orientation);
    if (arc.length() > kGeomTol) {
      el.emplace_back(arc);
      chain.tags.push_back(-static_cast<int>(i) - 1);
      cursor = arc.end_point();
    } else {
      cursor = arrive[i];
    }
  }
  el.emplace_back(Segment{cursor, b});
  chain.tags.push_back(static_cast<int>(wraps.size()));
  chain.path = GeometricPath(std::move(el));
  return chain;
}

/// Circles wrapped by the arcs of a path, in order. Consecutive arcs on the
/// same circle collapse into one wrap.
inline std::vector<Wrap> wraps_of(const GeometricPath& path) {
  std::vector<Wrap> out;
  for (const auto& e : path.elements()) {
    if (const auto* a = std::get_if<Arc>(&e)) {
      if (!out.empty() && out.back().disc == a->disc && out.back().orientation == a->orientation()) continue;
      out.push_back({a->disc, a->orientation()});
    }
  }
  return out;
}

inline bool path_clear(const GeometricPath& path, const std::vector<Disc>& obstacles, double tol = kGeomTol) {
  return path_clearance(path, obstacles) >= -tol;
}

inline bool path_smooth(const GeometricPath& path, double kink_tol = 1e-6) {
  return max_kink(path) <= kink_tol && !self_intersects(path).found;
}

namespace detail {

/// Greedy tangent chain: start from the straight segment and insert every
/// obstacle a piece of the chain runs into, passing it on the side where the
/// chain met it.
inline std::optional<GeometricPath> greedy_chain(const Vec2& a, const Vec2& b, const std::vector<Disc>& obstacles,
                                                 int max_insertions) {
  std::vector<Wrap> wraps;
  for (int it = 0; it <= max_insertions; ++it) {
    auto chain = build_chain(a, wraps, b);
    if (!chain) return std::nullopt;
    const auto& el = chain->path.elements();
    bool inserted = false;
    for (std::size_t e = 0; e < el.size() && !inserted; ++e) {
      const int tag = chain->tags[e];
      if (const auto* seg = std::get_if<Segment>(&el[e])) {
        std::optional<std::size_t> hit;
        double best_t = 2.0;
        for (std::size_t k = 0; k < obstacles.size(); ++k) {
          if (auto t = segment_entry(*seg, obstacles[k]); t && *t < best_t) {
            best_t = *t;
            hit = k;
          }
        }
        if (!hit) continue;
        const Disc& d = obstacles[*hit];
        const bool center_right = cross(seg->end - seg->start, d.center - seg->start) < 0.0;
        wraps.insert(wraps.begin() + tag, Wrap{d, center_right ? Orientation::kCw : Orientation::kCcw});
        inserted = true;
      } else {
        const Arc& arc = std::get<Arc>(el[e]);
        const int w = -tag - 1;
        for (const Disc& d : obstacles) {
          if (d == arc.disc) continue;
          if (element_disc_clearance(el[e], d) < -kGeomTol) {
            wraps.insert(wraps.begin() + w + 1, Wrap{d, arc.orientation()});
            inserted = true;
            break;
          }
        }
      }
    }
    if (!inserted) return chain->path;
  }
  return std::nullopt;
}

/// Removes runs of wraps whose replacement tangent stays clear and shortens
/// the chain (string pulling), up to `max_rounds` accepted removals.
inline std::optional<GeometricPath> pulled_chain(const Vec2& a, std::vector<Wrap> wraps, const Vec2& b,
                                                 const std::vector<Disc>& obstacles, int max_rounds) {
  auto current = build_chain(a, wraps, b);
  if (!current) return std::nullopt;
  for (int round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (std::size_t len = wraps.size(); len >= 1 && !changed; --len) {
      for (std::size_t i = 0; i + len <= wraps.size() && !changed; ++i) {
        std::vector<Wrap> trial(wraps.begin(), wraps.begin() + i);
        trial.insert(trial.end(), wraps.begin() + i + len, wraps.end());
        auto chain = build_chain(a, trial, b);
        if (!chain || !path_clear(chain->path, obstacles)) continue;
        if (chain->path.length() < current->path.length() - kGeomTol ||
            (!path_smooth(current->path) && path_smooth(chain->path))) {
          wraps = std::move(trial);
          current = std::move(chain);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return current->path;
}

}  // namespace detail

struct SmoothingOptions {
  int max_iterations{10};
  double kink_tolerance{1e-6};
};

/// Removes self-intersections and heading kinks. A path that already has
/// neither is returned unchanged. Otherwise tangents are drawn across the
/// outer obstacles (string pulling over the wrapped circles) or, failing
/// that, the chain is rebuilt greedily; the shortest clear, smooth result no
/// longer than the input wins.
inline GeometricPath smooth_path(const GeometricPath& path, const std::vector<Disc>& obstacles,
                                 const SmoothingOptions& options = {}) {
  if (path.empty()) throw InvalidPathError("smooth_path: empty path");
  if (path_smooth(path, options.kink_tolerance)) return path;
  const Vec2 a = path.start();
  const Vec2 b = path.end();
  const double limit = path.length() + kGeomTol;
  const double input_clearance = path_clearance(path, obstacles);
  const double floor = std::min(0.0, input_clearance) - kGeomTol;

  std::optional<GeometricPath> best;
  auto consider = [&](std::optional<GeometricPath> candidate) {
    if (!candidate || !candidate->connected()) return;
    if (!path_smooth(*candidate, options.kink_tolerance)) return;
    if (candidate->length() > limit) return;
    if (path_clearance(*candidate, obstacles) < floor) return;
    if (!best || candidate->length() < best->length()) best = std::move(candidate);
  };
  consider(detail::pulled_chain(a, wraps_of(path), b, obstacles, options.max_iterations));
  consider(detail::greedy_chain(a, b, obstacles, options.max_iterations * std::max<int>(1, obstacles.size())));
  if (!best) throw InfeasiblePlanError("smooth_path: could not remove self-intersections");
  return *best;
}

// ---------------------------------------------------------------------------
// Unreachable targets

namespace detail {

/// Shrinks any disc containing `p` so that `p` lies just outside it.
inline std::vector<Disc> release_point(std::vector<Disc> discs, const Vec2& p, double gap = 1e-6) {
  for (Disc& d : discs) {
    const double dist = distance(p, d.center);
    if (dist < d.radius + gap) d.radius = std::max(0.0, dist - gap);
  }
  std::erase_if(discs, [](const Disc& d) { return d.radius <= kGeomTol; });
  return discs;
}

inline void circle_intersections(const Disc& a, const Disc& b, std::vector<Vec2>& out) {
  const Vec2 delta = b.center - a.center;
  const double d = delta.norm();
  if (d <= kGeomTol || d > a.radius + b.radius || d < std::abs(a.radius - b.radius)) return;
  const double along = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d);
  const double h = std::sqrt(std::max(0.0, a.radius * a.radius - along * along));
  const Vec2 e = delta / d;
  out.push_back(a.center + e * along + e.perp() * h);
  out.push_back(a.center + e * along - e.perp() * h);
}

}  // namespace detail

struct FallbackOptions {
  double perception_radius{5.0};
  double margin{0.7};  // kept between the endpoint and the perception boundary
  double push{1e-6};   // candidates are nudged off boundaries by this much
};

/// Reachable point closest to an unreachable `target`. Candidates are the
/// projections of the target onto every forbidden circle and onto the
/// (shrunk) perception circle, plus pairwise intersections of those circles;
/// they are tried in order of distance to the target until one is reachable
/// from `start`.
inline Vec2 fallback_target(const Vec2& start, const Vec2& target, const std::vector<Disc>& forbidden,
                            const FallbackOptions& options = {}) {
  const std::vector<Disc> discs = detail::release_point(forbidden, start);
  const Disc zone{start, std::max(0.0, options.perception_radius - options.margin)};

  std::vector<Vec2> candidates;
  auto project = [&](const Disc& d, bool outward) {
    Vec2 dir = target - d.center;
    if (dir.norm() <= kGeomTol) dir = start - d.center;
    if (dir.norm() <= kGeomTol) dir = {1.0, 0.0};
    dir = dir.normalized();
    candidates.push_back(d.center + dir * (d.radius + (outward ? options.push : -options.push)));
  };
  if (distance(target, start) <= zone.radius) candidates.push_back(target);
  project(zone, false);
  for (const Disc& d : discs) project(d, true);
  std::vector<Disc> circles = discs;
  circles.push_back(zone);
  for (std::size_t i = 0; i < circles.size(); ++i) {
    for (std::size_t j = i + 1; j < circles.size(); ++j) {
      std::vector<Vec2> pts;
      detail::circle_intersections(circles[i], circles[j], pts);
      for (Vec2 p : pts) {
        // Nudge outside both obstacle circles (inside for the zone).
        Vec2 n{};
        for (std::size_t k : {i, j}) {
          const Vec2 out = (p - circles[k].center).normalized();
          n += (k == circles.size() - 1) ? -out : out;
        }
        candidates.push_back(p + n.normalized() * (2.0 * options.push));
      }
    }
  }

  auto admissible = [&](const Vec2& p) {
    if (distance(p, start) > zone.radius + kGeomTol) return false;
    return std::none_of(discs.begin(), discs.end(), [&](const Disc& d) { return d.contains(p, 0.0); });
  };
  std::erase_if(candidates, [&](const Vec2& p) { return !admissible(p); });
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const Vec2& a, const Vec2& b) { return distance(a, target) < distance(b, target); });
  const double current = distance(start, target);
  for (const Vec2& p : candidates) {
    if (distance(p, target) >= current - 1e-3) break;
    if (distance(p, start) <= kGeomTol) continue;
    try {
      if (shortest_path(start, p, discs)) return p;
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw DeadEndError("fallback_target: no reachable point closer to the target");
}

// ---------------------------------------------------------------------------
// Dynamic obstacles

/// Linear extrapolation of each perceived obstacle over the window. Disc k
/// (k = 1..horizon) is centered at p + k c v with radius
/// safe_radius + w_obs(k).
inline std::vector<std::vector<Disc>> predict_obstacle_positions(const std::vector<PerceivedDynamic>& visible,
                                                                 int horizon, double c, double safe_radius,
                                                                 const TubeParams& tube) {
  std::vector<std::vector<Disc>> out;
  out.reserve(visible.size());
  for (const auto& o : visible) {
    if (!o.velocity.finite() || !o.position.finite()) throw ConfigError("predict: non-finite obstacle state");
    std::vector<Disc> discs;
    for (int k = 1; k <= horizon; ++k) {
      discs.push_back({o.position + o.velocity * (k * c), safe_radius + tube_width_obstacle(k, 0, tube)});
    }
    out.push_back(std::move(discs));
  }
  return out;
}

/// Union of the predicted discs of one obstacle that conflict with the robot.
struct ObstacleBelt {
  std::size_t obstacle{0};
  int first_index{1};  // 1-based prediction step
  int last_index{1};
  std::vector<Disc> members;
};

/// Predicted discs first..last of one obstacle, with bridging discs inserted
/// wherever consecutive members would not overlap.
inline ObstacleBelt make_belt(std::size_t obstacle, const std::vector<Disc>& predicted, int first, int last) {
  ObstacleBelt belt{obstacle, first, last, {}};
  for (int k = first; k <= last; ++k) {
    const Disc& d = predicted[k - 1];
    if (!belt.members.empty()) {
      const Disc prev = belt.members.back();
      const double gap = distance(prev.center, d.center);
      const double r = std::min(prev.radius, d.radius);
      const double reach = prev.radius + d.radius - 0.25 * r;
      if (gap > reach) {
        const int pieces = static_cast<int>(std::ceil(gap / r));
        for (int j = 1; j < pieces; ++j) {
          belt.members.push_back({prev.center + (d.center - prev.center) * (static_cast<double>(j) / pieces), r});
        }
      }
    }
    belt.members.push_back(d);
  }
  return belt;
}

struct ReferenceTrajectory {
  /// states[0] is the reference at the current step; states[k] at step kappa+k.
  std::vector<Pose> states;
  /// inputs[k] drives states[k] to states[k+1].
  std::vector<Input> inputs;
  GeometricPath source_path;
  double spacing{0.0};

  int horizon() const { return static_cast<int>(inputs.size()); }
};

/// Samples equidistant points along `path` and produces inputs whose rollout
/// through the robot model lands on them; the resulting states are exactly
/// consistent with the model. Headings start from the path direction.
inline ReferenceTrajectory extract_reference(const GeometricPath& path, int steps, double speed, double c,
                                             const InputBounds& bounds) {
  ReferenceTrajectory ref;
  ref.source_path = path;
  ref.spacing = speed * c;
  const double total = path.length();
  Pose pose{path.start().x, path.start().y, path.tangent_at(0.0).angle()};
  ref.states.push_back(pose);
  for (int k = 0; k < steps; ++k) {
    const double s = std::min((k + 1) * ref.spacing, total);
    const Vec2 d = path.point_at(s) - pose.position();
    const double cs = std::cos(pose.theta);
    const double sn = std::sin(pose.theta);
    const double ahead = d.x * cs + d.y * sn;
    const double lateral = -d.x * sn + d.y * cs;
    Input u{};
    if (ahead > 1e-9 && d.norm() > 1e-9) {
      u.v = ahead / c;
      u.omega = lateral / (c * ahead);
      u = bounds.clamp(u);
    }
    pose = step_pose(pose, u, c);
    ref.inputs.push_back(u);
    ref.states.push_back(pose);
  }
  return ref;
}

struct PlanRequest {
  PerceptionSnapshot snapshot;
  Vec2 final_target;
  int horizon{5};             // N^p
  int lookahead{0};           // prediction steps checked for conflicts; <= horizon means horizon
  int reference_steps{10};    // length of the extracted reference (>= horizon)
  double sampling_time{0.1};
  double safe_radius{0.7};
  double planning_margin{0.0};
  InputBounds bounds;
  TubeParams tube;
  int max_iterations{10};
  HeadingBias bias;  // side preference; zero turn cost picks the shorter side
};

struct PlanResult {
  ReferenceTrajectory reference;
  GeometricPath path;
  StaticPlan static_plan;
  std::vector<ObstacleBelt> belts;
  Vec2 temporary_target;
  bool used_fallback{false};
  int iterations{0};
};

namespace detail {

/// Conflicting (obstacle, prediction index) pairs: robot position at step k
/// inside the predicted disc at k-1, k or k+1.
inline std::vector<std::vector<int>> conflicts(const GeometricPath& path, double spacing, int horizon,
                                               const std::vector<std::vector<Disc>>& predicted) {
  std::vector<std::vector<int>> out(predicted.size());
  for (std::size_t o = 0; o < predicted.size(); ++o) {
    for (int k = 1; k <= horizon; ++k) {
      const Vec2 p = path.point_at(k * spacing);
      for (int j = std::max(1, k - 1); j <= std::min(horizon, k + 1); ++j) {
        if (predicted[o][j - 1].contains(p)) out[o].push_back(j);
      }
    }
    std::sort(out[o].begin(), out[o].end());
    out[o].erase(std::unique(out[o].begin(), out[o].end()), out[o].end());
  }
  return out;
}

}  // namespace detail

/// Full planning cycle: plan on static obstacles, overlay predicted dynamic
/// discs, check the time-indexed robot positions for conflicts, form belts
/// from conflicting discs and replan until no new conflict appears.
inline PlanResult plan_with_dynamics(const PlanRequest& request, Rng& rng) {
  if (request.horizon < 1) throw ConfigError("plan_with_dynamics: horizon must be >= 1");
  const Vec2 start = request.snapshot.robot.pose.position();
  const double inflate = request.safe_radius + request.planning_margin;
  std::vector<Disc> statics;
  for (const Disc& d : request.snapshot.visible_static) statics.push_back({d.center, inflate});

  const double speed = reference_speed(request.bounds);
  const double spacing = speed * request.sampling_time;
  const int look = std::max(request.horizon, request.lookahead);
  auto predicted = predict_obstacle_positions(request.snapshot.visible_dynamic, look,
                                              request.sampling_time, request.safe_radius, request.tube);
  for (auto& discs : predicted) {
    for (Disc& d : discs) d.radius += request.planning_margin;
  }

  PlanResult result;
  const double reach = std::max(0.0, request.snapshot.perception_radius - request.safe_radius);
  Vec2 goal = request.final_target;
  if (distance(goal, start) > reach) goal = start + (goal - start).normalized() * reach;
  result.temporary_target = goal;

  std::vector<std::vector<int>> belt_indices(predicted.size());
  for (int it = 0; it < request.max_iterations; ++it) {
    result.iterations = it + 1;
    std::vector<Disc> obstacles = statics;
    result.belts.clear();
    for (std::size_t o = 0; o < predicted.size(); ++o) {
      if (belt_indices[o].empty()) continue;
      auto belt = make_belt(o, predicted[o], belt_indices[o].front(), belt_indices[o].back());
      obstacles.insert(obstacles.end(), belt.members.begin(), belt.members.end());
      result.belts.push_back(std::move(belt));
    }
    obstacles = detail::release_point(std::move(obstacles), start);

    Vec2 target = result.temporary_target;
    const bool blocked_target =
        std::any_of(obstacles.begin(), obstacles.end(), [&](const Disc& d) { return d.contains(target); });
    std::optional<StaticPlan> plan;
    if (!blocked_target) {
      try {
        plan = plan_static(start, target, obstacles, rng, request.bias);
      } catch (const InfeasiblePlanError&) {
      }
    }
    if (!plan) {
      target = fallback_target(start, result.temporary_target, obstacles,
                               {request.snapshot.perception_radius, request.safe_radius});
      result.used_fallback = true;
      plan = plan_static(start, target, obstacles, rng, request.bias);
    }
    result.static_plan = *plan;
    result.path = smooth_path(plan->path, obstacles);

    // Conflicts are judged against the discs actually planned around.
    auto judged = predicted;
    for (auto& discs : judged) discs = detail::release_point(discs, start);
    for (auto& discs : judged) {
      while (static_cast<int>(discs.size()) < look) discs.push_back({{1e9, 1e9}, 0.0});
    }
    const auto hits = detail::conflicts(result.path, spacing, look, judged);
    bool grew = false;
    for (std::size_t o = 0; o < hits.size(); ++o) {
      for (int j : hits[o]) {
        if (!std::binary_search(belt_indices[o].begin(), belt_indices[o].end(), j) &&
            (belt_indices[o].empty() || j < belt_indices[o].front() || j > belt_indices[o].back())) {
          belt_indices[o].push_back(j);
          std::sort(belt_indices[o].begin(), belt_indices[o].end());
          grew = true;
        }
      }
    }
    if (!grew) {
      result.reference = extract_reference(result.path, std::max(request.reference_steps, request.horizon), speed,
                                           request.sampling_time, request.bounds);
      return result;
    }
  }
  throw InfeasiblePlanError("plan_with_dynamics: iteration cap reached");
}

}  // namespace htmpc

#endif  // HTMPC_PLANNER_HPP_
