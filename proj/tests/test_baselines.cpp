#include <gtest/gtest.h>

#include <cmath>

#include "htmpc/baselines/apf.hpp"
#include "htmpc/baselines/rrt.hpp"
#include "htmpc/generator.hpp"

using namespace htmpc;

namespace {

PerceptionSnapshot at(const Vec2& p, double heading = 0.0) {
  PerceptionSnapshot s;
  s.robot.pose = {p.x, p.y, heading};
  return s;
}

double polyline_length(const std::vector<Vec2>& pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += distance(pts[i - 1], pts[i]);
  return total;
}

}  // namespace

TEST(Hlrrt, TreeCostsStayConsistent) {
  PerceptionSnapshot snap = at({2, 2});
  snap.visible_static.push_back({{4, 3}, 0.3});
  snap.visible_dynamic.push_back({{3, 4}, {0.1, 0}});
  RrtParams p;
  p.max_iterations = 600;
  Rng rng(7);
  const RrtResult r = hlrrt_plan(snap, {12, 12}, p, rng);
  EXPECT_TRUE(r.tree.consistent());
  EXPECT_EQ(r.iterations, 600);
  for (const auto& n : r.tree.nodes) EXPECT_LE(distance(n.position, {2, 2}), p.horizon_radius + 1e-9);
}

TEST(Hlrrt, FreeSpacePathIsNearlyStraight) {
  RrtParams p;
  p.max_iterations = 1500;
  Rng rng(3);
  const RrtResult r = hlrrt_plan(at({1, 1}), {4, 3}, p, rng);
  ASSERT_TRUE(r.path);
  EXPECT_EQ(r.path->front(), (Vec2{1, 1}));
  EXPECT_LE(polyline_length(*r.path), 1.1 * distance({1, 1}, {4, 3}));
  EXPECT_LT(distance(r.path->back(), {4, 3}), 0.3);
}

TEST(Hlrrt, ReturnedPathKeepsClearance) {
  PerceptionSnapshot snap = at({1, 1});
  snap.visible_static.push_back({{2.5, 2.5}, 0.3});
  RrtParams p;
  p.max_iterations = 800;
  Rng rng(5);
  const RrtResult r = hlrrt_plan(snap, {5, 5}, p, rng);
  ASSERT_TRUE(r.path);
  EXPECT_TRUE(detail::polyline_clear(*r.path, {{2.5, 2.5}}, p.clearance));
}

TEST(Hlrrt, ZeroBudgetYieldsNoPath) {
  RrtParams p;
  p.max_iterations = 0;
  Rng rng(1);
  const RrtResult r = hlrrt_plan(at({1, 1}), {5, 5}, p, rng);
  EXPECT_FALSE(r.path);
  EXPECT_EQ(r.tree.nodes.size(), 1u);
}

TEST(Apf, RepulsionVanishesOutsideInfluence) {
  ApfParams p;
  const Vec2 bare = apf_force({0, 0}, {5, 0}, {}, p);
  const Vec2 far = apf_force({0, 0}, {5, 0}, {{0, p.influence_radius + 1e-6}}, p);
  EXPECT_EQ(bare, far);
  EXPECT_NEAR(bare.norm(), p.attraction_gain, 1e-15);
}

TEST(Apf, MirrorSymmetry) {
  ApfParams p;
  const std::vector<Vec2> obs{{1, 0.4}, {2, -0.7}};
  const std::vector<Vec2> mirrored{{1, -0.4}, {2, 0.7}};
  const Vec2 f = apf_force({0, 0.1}, {5, 0}, obs, p);
  const Vec2 g = apf_force({0, -0.1}, {5, 0}, mirrored, p);
  EXPECT_NEAR(f.x, g.x, 1e-12);
  EXPECT_NEAR(f.y, -g.y, 1e-12);
}

TEST(Apf, RepulsionScalesWithGain) {
  ApfParams p;
  p.attraction_gain = 1e-9;
  const Vec2 a = apf_force({0, 0}, {0, 0}, {{0.5, 0}}, p);
  p.repulsion_gain *= 3.0;
  const Vec2 b = apf_force({0, 0}, {0, 0}, {{0.5, 0}}, p);
  EXPECT_NEAR(b.x, 3.0 * a.x, 1e-12);
  EXPECT_LT(a.x, 0.0);
}

TEST(Apf, StepFollowsForceAndRespectsBounds) {
  const InputBounds bounds{{-0.2, -1.5}, {1.0, 1.5}};
  ApfParams p;
  const Input u = apf_step(at({1, 1}, 0.0), {5, 1}, p, bounds, 0.1);
  EXPECT_NEAR(u.omega, 0.0, 1e-12);
  EXPECT_NEAR(u.v, std::min(1.0, p.speed_gain * p.attraction_gain), 1e-12);
  const Input turn = apf_step(at({1, 1}, kPi), {5, 1}, p, bounds, 0.1);
  EXPECT_TRUE(bounds.contains(turn));
  EXPECT_NEAR(turn.v, 0.0, 1e-12);  // slowed to zero facing away
}

TEST(Apf, WallsRepelNearTheArenaBorder) {
  ApfParams p;
  const InputBounds bounds{{-0.2, -1.5}, {1.0, 1.5}};
  const Input open = apf_step(at({0.3, 7}, kPi / 2), {0.3, 12}, p, bounds, 0.1);
  const Input walled = apf_step(at({0.3, 7}, kPi / 2), {0.3, 12}, p, bounds, 0.1, Vec2{14, 14});
  EXPECT_NEAR(open.omega, 0.0, 1e-12);
  EXPECT_LT(walled.omega, 0.0);  // turns right, away from the wall at x = 0
}

TEST(Apf, NamedTunings) {
  EXPECT_FALSE(apf_tuning("paper-failure").slow_in_turns);
  EXPECT_TRUE(apf_tuning("retuned").slow_in_turns);
  EXPECT_THROW(apf_tuning("other"), ConfigError);
}
