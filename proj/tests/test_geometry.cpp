#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "htmpc/geometry.hpp"
#include "htmpc/rng.hpp"
#include "htmpc/tangent_graph.hpp"
#include "oracles.hpp"

using namespace htmpc;

TEST(Angles, NormalizeIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_NEAR(normalize_angle(3.0 * kPi + 0.1), -kPi + 0.1, 1e-12);
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double n = normalize_angle(a);
    EXPECT_GT(n, -kPi);
    EXPECT_LE(n, kPi);
    EXPECT_NEAR(std::remainder(n - a, kTwoPi), 0.0, 1e-9);
  }
}

TEST(TangentLines, FourTangentsOfSeparatedDiscs) {
  const Disc a{{0, 0}, 1.0};
  const Disc b{{5, 1}, 0.5};
  const auto lines = tangent_lines(a, b);
  ASSERT_EQ(lines.size(), 4u);
  for (const auto& [p, q] : lines) {
    EXPECT_NEAR(distance(p, a.center), a.radius, 1e-9);
    EXPECT_NEAR(distance(q, b.center), b.radius, 1e-9);
    // Tangency: the radius is perpendicular to the line at both touch points.
    const Vec2 dir = (q - p).normalized();
    EXPECT_NEAR(dot(p - a.center, dir), 0.0, 1e-9);
    EXPECT_NEAR(dot(q - b.center, dir), 0.0, 1e-9);
  }
}

TEST(TangentLines, PointTangentsTouchAtRightAngles) {
  const Disc d{{1, 2}, 0.8};
  const Vec2 p{4, -1};
  const auto t = point_tangents(p, d);
  ASSERT_EQ(t.size(), 2u);
  for (const auto& [from, touch] : t) {
    EXPECT_NEAR(dot(touch - d.center, touch - p), 0.0, 1e-9);
  }
}

TEST(Path, LengthAndContinuity) {
  const Disc d{{0, 0}, 1.0};
  const Arc arc = Arc::from_angles(d, kPi, 0.0, Orientation::kCw);
  GeometricPath gap({Segment{{-3, 1}, {-1.1, 0}}, arc});
  EXPECT_FALSE(gap.connected());
  EXPECT_NEAR(arc.length(), kPi, 1e-12);
  EXPECT_TRUE(arc.contains_angle(kPi / 2));
  EXPECT_FALSE(arc.contains_angle(-kPi / 2));
  GeometricPath ok({Segment{{-1, -2}, {-1, 0}}, arc});
  EXPECT_TRUE(ok.connected());
  EXPECT_NEAR(ok.length(), 2.0 + kPi, 1e-12);
  EXPECT_NEAR(distance(ok.point_at(2.0 + kPi / 2), {0, 1}), 0.0, 1e-12);
  EXPECT_NEAR(max_kink(ok), 0.0, 1e-12);
}

TEST(Path, SelfIntersectionDetected) {
  GeometricPath cross_path({Segment{{0, 0}, {2, 2}}, Segment{{2, 2}, {2, 0}}, Segment{{2, 0}, {0, 2}}});
  const auto hit = self_intersects(cross_path);
  ASSERT_TRUE(hit.found);
  EXPECT_NEAR(hit.point->x, 1.0, 1e-9);
  EXPECT_NEAR(hit.point->y, 1.0, 1e-9);
  GeometricPath zigzag({Segment{{0, 0}, {1, 1}}, Segment{{1, 1}, {2, 0}}});
  EXPECT_FALSE(self_intersects(zigzag).found);
}

TEST(ShortestPath, SingleObstacleAnalytic) {
  const auto path = shortest_path({-2, 0}, {2, 0}, {Disc{{0, 0}, 1.0}});
  ASSERT_TRUE(path);
  EXPECT_NEAR(path->length(), 2.0 * std::sqrt(3.0) + kPi / 3.0, 1e-6);
  EXPECT_TRUE(path->connected(1e-9));
  EXPECT_LE(max_kink(*path), 1e-6);
  EXPECT_GE(path_clearance(*path, {Disc{{0, 0}, 1.0}}), -1e-9);
}

TEST(ShortestPath, StraightWhenUnobstructed) {
  const auto path = shortest_path({0, 0}, {3, 4}, {Disc{{0, 3}, 0.5}});
  ASSERT_TRUE(path);
  EXPECT_NEAR(path->length(), 5.0, 1e-12);
}

TEST(ShortestPath, EndpointInsideObstacleThrows) {
  EXPECT_THROW(shortest_path({0, 0}, {3, 0}, {Disc{{0, 0}, 1.0}}), GeometryError);
}

TEST(ShortestPath, BarrierForcesTheOtherSide) {
  const Disc d{{0, 0}, 1.0};
  // A ray upward from the center forbids passing above.
  const auto below = shortest_path({-2, 0.1}, {2, 0.1}, {d}, {Segment{{0, 0}, {0, 100}}});
  ASSERT_TRUE(below);
  double lowest = 0.0;
  for (double s = 0.0; s <= below->length(); s += 0.05) lowest = std::min(lowest, below->point_at(s).y);
  EXPECT_LT(lowest, -0.9);
}

// Property: the tangent path is never longer than a fine grid search and
// stays clear of every disc.
TEST(ShortestPath, AgreesWithGridSearch) {
  Rng rng(11);
  for (int scene = 0; scene < 6; ++scene) {
    std::vector<Disc> discs;
    while (discs.size() < 4) {
      const Disc d{{rng.uniform(1.0, 5.0), rng.uniform(1.0, 5.0)}, rng.uniform(0.3, 0.7)};
      if (distance(d.center, {0.3, 0.3}) < d.radius + 0.2 || distance(d.center, {5.7, 5.7}) < d.radius + 0.2) continue;
      discs.push_back(d);
    }
    const auto path = shortest_path({0.3, 0.3}, {5.7, 5.7}, discs);
    ASSERT_TRUE(path);
    EXPECT_GE(path_clearance(*path, discs), -1e-7);
    const double grid = oracle::grid_astar({0.3, 0.3}, {5.7, 5.7}, discs, {-0.5, -0.5}, {6.5, 6.5}, 0.05);
    EXPECT_LE(std::abs(path->length() - grid) / grid, 0.05) << "scene " << scene;
  }
}
