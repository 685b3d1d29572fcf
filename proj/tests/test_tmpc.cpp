#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "htmpc/pattern_search.hpp"
#include "htmpc/planner.hpp"
#include "htmpc/tmpc.hpp"

using namespace htmpc;

namespace {

TmpcProblem straight_problem(const TmpcConfig& cfg, double length = 4.0) {
  TmpcProblem p;
  p.current.pose = {1, 1, 0};
  const GeometricPath path = GeometricPath::straight({1, 1}, {1 + length, 1});
  p.reference = window(extract_reference(path, cfg.horizon, 0.5, cfg.sampling_time, cfg.bounds), 0, cfg.horizon);
  p.plan_radius = plan_radius(path, {1, 1}, cfg.safe_radius);
  return p;
}

}  // namespace

TEST(Constraints, DynamicIndexExclusions) {
  for (int np : {2, 3, 5, 8}) {
    TmpcConfig cfg;
    cfg.horizon = np;
    cfg.control_horizon = np;
    TmpcProblem p = straight_problem(cfg);
    p.snapshot.visible_dynamic.push_back({{4, 1}, {-0.1, 0}});
    p.snapshot.visible_dynamic.push_back({{3, 3}, {0, -0.2}});
    const ConstraintSet set = build_constraints(p, cfg);
    for (int o = 0; o < 2; ++o) {
      std::set<int> prev, cur, next;
      for (const auto& g : set.items) {
        if (g.obstacle != o) continue;
        if (g.kind == ConstraintKind::kDynamicPrev) {
          prev.insert(g.k);
          EXPECT_EQ(g.index, g.k - 1);
        }
        if (g.kind == ConstraintKind::kDynamicCurrent) {
          cur.insert(g.k);
          EXPECT_EQ(g.index, g.k);
        }
        if (g.kind == ConstraintKind::kDynamicNext) {
          next.insert(g.k);
          EXPECT_EQ(g.index, g.k + 1);
        }
      }
      std::set<int> all, no_first, no_last;
      for (int k = 1; k <= np; ++k) {
        all.insert(k);
        if (k > 1) no_first.insert(k);
        if (k < np) no_last.insert(k);
      }
      EXPECT_EQ(prev, no_first) << "N^p " << np;
      EXPECT_EQ(cur, all) << "N^p " << np;
      EXPECT_EQ(next, no_last) << "N^p " << np;
    }
    EXPECT_EQ(set.count(ConstraintKind::kStateBox), static_cast<std::size_t>(np));
    EXPECT_EQ(set.count(ConstraintKind::kStatic), 0u);
  }
}

TEST(Constraints, SeparationBoundsIncludeBothTubes) {
  TmpcConfig cfg;
  TmpcProblem p = straight_problem(cfg);
  p.snapshot.visible_static.push_back({{3, 2}, 0.3});
  p.snapshot.visible_dynamic.push_back({{4, 1}, {-0.1, 0}});
  for (const auto& g : build_constraints(p, cfg).items) {
    const double wr = tube_width_robot(g.k, 0, cfg.tube);
    if (g.kind == ConstraintKind::kStatic) EXPECT_DOUBLE_EQ(g.bound, cfg.safe_radius + wr);
    if (g.kind == ConstraintKind::kDynamicCurrent || g.kind == ConstraintKind::kDynamicPrev ||
        g.kind == ConstraintKind::kDynamicNext) {
      EXPECT_DOUBLE_EQ(g.bound, cfg.safe_radius + wr + tube_width_obstacle(g.index, 0, cfg.tube));
    }
  }
}

TEST(Objective, DiscountedTrackingPlusEnergy) {
  TmpcConfig cfg;
  ReferenceTrajectory ref;
  for (int k = 0; k <= 5; ++k) ref.states.push_back({0.1 * k, 0, 0});
  ref.inputs.assign(5, {1.0, 0.0});
  std::vector<Pose> x;
  for (int k = 1; k <= 5; ++k) x.push_back({0.1 * k, 0.2, 0});
  std::vector<Input> u(5, {0.5, 0.1});
  double expect = 0.0;
  for (int k = 1; k <= 5; ++k) expect += std::pow(0.9, k) * 0.2 + 0.01 * (0.25 + 0.01);
  EXPECT_NEAR(objective(x, u, ref, 0.9, 0.01, DiscountMode::kPerStep), expect, 1e-14);
  // The absolute-time mode reduces to w1^(k / (kappa + 1)).
  double paper = 0.0;
  for (int k = 1; k <= 5; ++k) paper += std::pow(0.9, (3.0 + k) / 4.0) * 0.2 + 0.01 * 0.26;
  EXPECT_NEAR(objective(x, u, ref, 0.9, 0.01, DiscountMode::kPaperExponent, 3), paper, 1e-14);
}

TEST(PlanRadius, FarthestPointOfThePathWithFloor) {
  const GeometricPath p = GeometricPath::straight({0, 0}, {3, 4});
  EXPECT_DOUBLE_EQ(plan_radius(p, {0, 0}, 0.7), 5.0);
  EXPECT_DOUBLE_EQ(plan_radius(GeometricPath::straight({0, 0}, {0.1, 0}), {0, 0}, 0.7), 0.8);
}

TEST(Solve, TracksAFreeStraightReference) {
  TmpcConfig cfg;
  cfg.max_evaluations = 4000;
  cfg.budget_seconds = 1e9;
  TmpcProblem p = straight_problem(cfg);
  Rng rng(1);
  const TmpcSolution s = solve(p, cfg, rng);
  EXPECT_TRUE(s.feasible);
  EXPECT_LE(audit(p, cfg, s.inputs, s.states), cfg.feasibility_tol);
  EXPECT_GT(s.inputs.front().v, 0.2);
  EXPECT_EQ(s.gains.size(), 5u);
  for (const auto& g : s.gains) EXPECT_TRUE(g.stable);
}

TEST(Solve, RespectsEvaluationBudget) {
  TmpcConfig cfg;
  cfg.max_evaluations = 37;
  cfg.seconds_per_evaluation = 1e-3;
  cfg.budget_seconds = 1e9;
  TmpcProblem p = straight_problem(cfg);
  Rng rng(1);
  const TmpcSolution s = solve(p, cfg, rng);
  EXPECT_LE(s.evaluations, 37);
  EXPECT_NEAR(s.solve_time, 1e-3 * s.evaluations, 1e-15);
}

TEST(Solve, KeepsClearOfAnObstacleOnTheReference) {
  TmpcConfig cfg;
  cfg.max_evaluations = 6000;
  cfg.budget_seconds = 1e9;
  TmpcProblem p = straight_problem(cfg);
  p.snapshot.visible_static.push_back({{1.9, 1.0}, 0.3});
  Rng rng(3);
  const TmpcSolution s = solve(p, cfg, rng);
  for (const Pose& x : s.states) {
    EXPECT_GT(distance(x.position(), {1.9, 1.0}), cfg.safe_radius) << "feasible " << s.feasible;
  }
}

TEST(Audit, FlagsEachViolatedConstraint) {
  TmpcConfig cfg;
  TmpcProblem p = straight_problem(cfg);
  std::vector<Input> u(5, {0.5, 0.0});
  std::vector<Pose> x = rollout(p.current.pose, u, 0.1);
  EXPECT_LE(audit(p, cfg, u, x), 1e-12);
  // Slew: a jump of 0.6 from the previous input.
  p.previous_input = {-0.1, 0.0};
  EXPECT_NEAR(audit(p, cfg, u, x), 0.1, 1e-12);
  p.previous_input = {0.5, 0.0};
  // Input box.
  std::vector<Input> fast(5, {1.2, 0.0});
  p.previous_input = {1.2, 0.0};
  EXPECT_NEAR(audit(p, cfg, fast, rollout(p.current.pose, fast, 0.1)), 0.2, 1e-12);
  // Inconsistent states.
  p.previous_input = {0.5, 0.0};
  x[2].x += 0.05;
  EXPECT_GE(audit(p, cfg, u, x), 0.05 - 1e-12);
}

TEST(Evasive, TurnsAwayFromAnOncomingObstacle) {
  TmpcConfig cfg;
  PerceptionSnapshot snap;
  snap.robot.pose = {5, 5, 0};
  snap.visible_dynamic.push_back({{6.2, 5.0}, {-0.8, 0.0}});
  const EvasiveChoice e = evasive_input(snap.robot.pose, {0.5, 0.0}, snap, {10, 5}, cfg);
  EXPECT_EQ(e.evaluations, 49);
  // Holding the current command runs into the obstacle within the look-ahead.
  double straight = 1e9;
  Pose p = snap.robot.pose;
  for (int k = 1; k <= 15; ++k) {
    p = step_pose(p, {0.5, 0.0}, 0.1);
    straight = std::min(straight, distance(p.position(), extrapolate(snap.visible_dynamic[0], k, 0.1)) - 0.7);
  }
  EXPECT_LT(straight, 0.0);
  EXPECT_GT(e.clearance, straight + 0.2);
  EXPECT_GT(std::abs(e.input.omega), 0.1);
  EXPECT_TRUE(cfg.bounds.contains(e.input));
  EXPECT_LE(std::hypot(e.input.v - 0.5, e.input.omega), cfg.u_smooth + 1e-12);
}

TEST(Evasive, MakesProgressWhenClear) {
  TmpcConfig cfg;
  PerceptionSnapshot snap;
  snap.robot.pose = {5, 5, 0};
  const EvasiveChoice e = evasive_input(snap.robot.pose, {0.5, 0.0}, snap, {10, 5}, cfg);
  EXPECT_GT(e.input.v, 0.5);
  EXPECT_GE(e.clearance, 0.3);
}

// ---------------------------------------------------------------------------
// Pattern search

namespace {

SearchProblem quadratic(int n) {
  SearchProblem p;
  p.dimension = n;
  p.lower = Eigen::VectorXd::Constant(n, -2.0);
  p.upper = Eigen::VectorXd::Constant(n, 2.0);
  p.evaluate = [](const Eigen::VectorXd& x) { return (x.array() - 0.3).square().sum(); };
  p.starts = {Eigen::VectorXd::Constant(n, 1.5)};
  return p;
}

}  // namespace

TEST(PatternSearch, ConvergesOnAQuadratic) {
  const SearchResult r = pattern_search(quadratic(4));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.best_value, 0.0, 1e-10);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.best(i), 0.3, 1e-5);
}

TEST(PatternSearch, HistoryIsMonotone) {
  const SearchResult r = pattern_search(quadratic(3));
  ASSERT_EQ(static_cast<std::int64_t>(r.history.size()), r.evaluations);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
}

TEST(PatternSearch, MultiStartFindsTheDeeperBasin) {
  SearchProblem p;
  p.dimension = 1;
  p.lower = Eigen::VectorXd::Constant(1, -3.0);
  p.upper = Eigen::VectorXd::Constant(1, 3.0);
  p.evaluate = [](const Eigen::VectorXd& x) {
    return std::min(std::pow(x(0) + 2.0, 2) + 1.0, std::pow(x(0) - 2.0, 2));
  };
  p.initial_step = 0.05;
  p.starts = {Eigen::VectorXd::Constant(1, -2.5), Eigen::VectorXd::Constant(1, 2.5)};
  const SearchResult r = pattern_search(p);
  EXPECT_NEAR(r.best(0), 2.0, 1e-5);
  EXPECT_EQ(r.best_start, 1);
}

TEST(PatternSearch, BudgetCapsEvaluations) {
  SearchProblem p = quadratic(6);
  p.max_evaluations = 25;
  const SearchResult r = pattern_search(p);
  EXPECT_EQ(r.evaluations, 25);
  EXPECT_FALSE(r.converged);
  p.max_evaluations = 0;
  p.seconds_per_evaluation = 0.01;
  p.budget_seconds = 0.3;
  EXPECT_EQ(pattern_search(p).evaluations, 30);
}

TEST(PatternSearch, ZeroBudgetStillEvaluatesStarts) {
  SearchProblem p = quadratic(2);
  p.budget_seconds = 0.0;
  const SearchResult r = pattern_search(p);
  EXPECT_EQ(r.evaluations, 1);
  EXPECT_TRUE(r.best.isApprox(p.starts[0]));
}

TEST(PatternSearch, RejectsBadInput) {
  SearchProblem p = quadratic(2);
  p.starts = {Eigen::VectorXd::Constant(2, 5.0)};
  EXPECT_THROW(pattern_search(p), ConfigError);
  p = quadratic(2);
  p.lower(0) = 3.0;
  EXPECT_THROW(pattern_search(p), ConfigError);
}

TEST(MakeStarts, WarmThenReferenceThenSamples) {
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -1.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 1.0);
  Rng rng(1);
  const auto s = make_starts(Eigen::VectorXd::Constant(2, 4.0), Eigen::VectorXd::Zero(2), 4, lo, hi, rng);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_TRUE(s[0].isApprox(Eigen::VectorXd::Constant(2, 1.0)));
  EXPECT_TRUE(s[1].isZero());
  for (const auto& v : s) EXPECT_TRUE(within_bounds(v, lo, hi));
  EXPECT_THROW(make_starts(std::nullopt, Eigen::VectorXd::Zero(2), 0, lo, hi, rng), ConfigError);
}
