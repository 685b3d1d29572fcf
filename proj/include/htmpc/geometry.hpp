#ifndef HTMPC_GEOMETRY_HPP_
#define HTMPC_GEOMETRY_HPP_

// Planar primitives and tangent geometry over circular obstacles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "htmpc/errors.hpp"

namespace htmpc {

/// Absolute geometric tolerance in meters.
inline constexpr double kGeomTol = 1e-9;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps an angle to (-pi, pi].
inline double normalize_angle(double a) {
  a = std::remainder(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

/// Maps an angle to [0, 2pi).
inline double wrap_two_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
  double angle() const { return std::atan2(y, x); }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
  }
  /// Counterclockwise perpendicular.
  constexpr Vec2 perp() const { return {-y, x}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  static Vec2 polar(double r, double a) { return {r * std::cos(a), r * std::sin(a)}; }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

struct Disc {
  Vec2 center;
  double radius{0.0};

  /// Strict interior test with tolerance: points on the circle are outside.
  bool contains(const Vec2& p, double tol = kGeomTol) const {
    return distance(p, center) < radius - tol;
  }
  Disc inflated(double margin) const { return {center, radius + margin}; }
  Vec2 point_at(double angle) const { return center + Vec2::polar(radius, angle); }
  bool operator==(const Disc&) const = default;
};

enum class Orientation { kCcw, kCw };

inline Orientation opposite(Orientation o) {
  return o == Orientation::kCcw ? Orientation::kCw : Orientation::kCcw;
}

struct Segment {
  Vec2 start;
  Vec2 end;

  double length() const { return distance(start, end); }
  Vec2 direction() const { return (end - start).normalized(); }
  Vec2 point_at(double s) const {
    const double len = length();
    if (len <= 0.0) return start;
    return start + (end - start) * std::clamp(s / len, 0.0, 1.0);
  }
};

/// Circular arc. `sweep` is signed: positive is counterclockwise. A sweep of
/// +-2pi is a full circle.
struct Arc {
  Disc disc;
  double start_angle{0.0};
  double sweep{0.0};

  static Arc from_angles(const Disc& d, double start, double end, Orientation o) {
    const double s = normalize_angle(start);
    const double e = normalize_angle(end);
    const double span = o == Orientation::kCcw ? wrap_two_pi(e - s) : wrap_two_pi(s - e);
    return {d, s, o == Orientation::kCcw ? span : -span};
  }

  static Arc full_circle(const Disc& d, double start = 0.0, Orientation o = Orientation::kCcw) {
    return {d, normalize_angle(start), o == Orientation::kCcw ? kTwoPi : -kTwoPi};
  }

  Orientation orientation() const { return sweep >= 0.0 ? Orientation::kCcw : Orientation::kCw; }
  double end_angle() const { return normalize_angle(start_angle + sweep); }
  double length() const { return disc.radius * std::abs(sweep); }
  Vec2 start_point() const { return disc.point_at(start_angle); }
  Vec2 end_point() const { return disc.point_at(start_angle + sweep); }
  Vec2 point_at(double s) const {
    const double t = std::clamp(s, 0.0, length());
    const double sign = sweep >= 0.0 ? 1.0 : -1.0;
    return disc.point_at(start_angle + sign * t / disc.radius);
  }
  /// Unit direction of travel at arc length s.
  Vec2 tangent_at(double s) const {
    const double t = std::clamp(s, 0.0, length());
    const double sign = sweep >= 0.0 ? 1.0 : -1.0;
    const double a = start_angle + sign * t / disc.radius;
    return Vec2::polar(1.0, a).perp() * sign;
  }
  /// Whether the polar angle `a` lies on the arc, with an angular tolerance.
  bool contains_angle(double a, double tol = 1e-12) const {
    if (std::abs(sweep) >= kTwoPi - tol) return true;
    const double offset =
        sweep >= 0.0 ? wrap_two_pi(a - start_angle) : wrap_two_pi(start_angle - a);
    return offset <= std::abs(sweep) + tol || offset >= kTwoPi - tol;
  }
};

using PathElement = std::variant<Segment, Arc>;

inline double element_length(const PathElement& e) {
  return std::visit([](const auto& x) { return x.length(); }, e);
}
inline Vec2 element_start(const PathElement& e) {
  if (const auto* s = std::get_if<Segment>(&e)) return s->start;
  return std::get<Arc>(e).start_point();
}
inline Vec2 element_end(const PathElement& e) {
  if (const auto* s = std::get_if<Segment>(&e)) return s->end;
  return std::get<Arc>(e).end_point();
}
inline Vec2 element_point_at(const PathElement& e, double s) {
  return std::visit([s](const auto& x) { return x.point_at(s); }, e);
}
inline Vec2 element_tangent_at(const PathElement& e, double s) {
  if (const auto* seg = std::get_if<Segment>(&e)) return seg->direction();
  return std::get<Arc>(e).tangent_at(s);
}

/// Ordered chain of segments and arcs.
class GeometricPath {
 public:
  GeometricPath() = default;
  explicit GeometricPath(std::vector<PathElement> elements) : elements_(std::move(elements)) {}

  static GeometricPath straight(const Vec2& a, const Vec2& b) {
    return GeometricPath({Segment{a, b}});
  }

  const std::vector<PathElement>& elements() const { return elements_; }
  bool empty() const { return elements_.empty(); }
  std::size_t size() const { return elements_.size(); }
  void push_back(PathElement e) { elements_.push_back(std::move(e)); }
  void append(const GeometricPath& other) {
    elements_.insert(elements_.end(), other.elements_.begin(), other.elements_.end());
  }

  Vec2 start() const { return element_start(elements_.front()); }
  Vec2 end() const { return element_end(elements_.back()); }

  /// Largest gap between consecutive element endpoints.
  double max_gap() const {
    double gap = 0.0;
    for (std::size_t i = 1; i < elements_.size(); ++i) {
      gap = std::max(gap, distance(element_end(elements_[i - 1]), element_start(elements_[i])));
    }
    return gap;
  }
  bool connected(double tol = kGeomTol) const { return max_gap() <= tol; }

  double length() const {
    double total = 0.0;
    for (const auto& e : elements_) total += element_length(e);
    return total;
  }

  /// Point at arc length s from the start (clamped to the path).
  Vec2 point_at(double s) const { return locate(s, [](const PathElement& e, double t) { return element_point_at(e, t); }); }
  Vec2 tangent_at(double s) const { return locate(s, [](const PathElement& e, double t) { return element_tangent_at(e, t); }); }

 private:
  template <typename F>
  Vec2 locate(double s, F&& f) const {
    if (elements_.empty()) return {};
    for (const auto& e : elements_) {
      const double len = element_length(e);
      if (s <= len) return f(e, std::max(s, 0.0));
      s -= len;
    }
    const auto& last = elements_.back();
    return f(last, element_length(last));
  }

  std::vector<PathElement> elements_;
};

inline bool operator==(const Segment& a, const Segment& b) { return a.start == b.start && a.end == b.end; }
inline bool operator==(const Arc& a, const Arc& b) {
  return a.disc == b.disc && a.start_angle == b.start_angle && a.sweep == b.sweep;
}
inline bool operator==(const GeometricPath& a, const GeometricPath& b) { return a.elements() == b.elements(); }

// ---------------------------------------------------------------------------
// Tangents

/// Common tangent segments of two circles; the first point of each pair lies on
/// d1, the second on d2. External tangents are listed before internal ones.
/// Touching circles yield a single degenerate tangent at the contact point.
inline std::vector<std::pair<Vec2, Vec2>> tangent_lines(const Disc& d1, const Disc& d2) {
  const Vec2 delta = d2.center - d1.center;
  const double z = delta.squared_norm();
  if (z <= kGeomTol * kGeomTol && std::abs(d1.radius - d2.radius) <= kGeomTol) {
    throw GeometryError("tangent_lines: coincident discs");
  }
  std::vector<std::pair<Vec2, Vec2>> out;
  if (z <= kGeomTol * kGeomTol) return out;  // concentric: one contains the other

  // Lines a*x + b*y + c = 0 with a^2 + b^2 = 1 and signed distances s1*r1, s2*r2.
  struct Line {
    double a, b, c;
  };
  std::vector<Line> lines;
  auto solve = [&](double r1, double r2) {
    const double r = r2 - r1;
    double disc = z - r * r;
    if (disc < -kGeomTol * std::max(1.0, z)) return;
    disc = std::sqrt(std::max(0.0, disc));
    for (double sign : {1.0, -1.0}) {
      Line l{(delta.x * r + sign * delta.y * disc) / z, (delta.y * r - sign * delta.x * disc) / z, r1};
      l.c -= l.a * d1.center.x + l.b * d1.center.y;
      const bool duplicate = std::any_of(lines.begin(), lines.end(), [&](const Line& m) {
        return std::abs(m.a - l.a) < 1e-12 && std::abs(m.b - l.b) < 1e-12 && std::abs(m.c - l.c) < 1e-9;
      });
      if (!duplicate) lines.push_back(l);
      if (disc == 0.0) break;
    }
  };
  solve(d1.radius, d2.radius);    // external
  solve(d1.radius, -d2.radius);   // internal
  for (const Line& l : lines) {
    const Vec2 n{l.a, l.b};
    const Vec2 p1 = d1.center - n * (dot(n, d1.center) + l.c);
    const Vec2 p2 = d2.center - n * (dot(n, d2.center) + l.c);
    out.emplace_back(p1, p2);
  }
  return out;
}

/// The two tangent segments from an exterior point to a circle, as (p, touch).
/// The first touch point is reached turning counterclockwise about p.
inline std::vector<std::pair<Vec2, Vec2>> point_tangents(const Vec2& p, const Disc& d) {
  const Vec2 to_center = d.center - p;
  const double dist = to_center.norm();
  if (dist <= d.radius + kGeomTol) {
    throw GeometryError("point_tangents: point lies inside or on the circle (forbidden region)");
  }
  const double base = (p - d.center).angle();
  const double half = std::acos(d.radius / dist);
  return {{p, d.point_at(base - half)}, {p, d.point_at(base + half)}};
}

// ---------------------------------------------------------------------------
// Measurements

/// Total length; throws when consecutive elements do not share endpoints.
inline double path_length(const GeometricPath& path) {
  if (!path.connected()) throw InvalidPathError("path_length: disconnected path");
  return path.length();
}

inline double point_segment_distance(const Vec2& p, const Segment& s) {
  const Vec2 d = s.end - s.start;
  const double len2 = d.squared_norm();
  if (len2 <= 0.0) return distance(p, s.start);
  const double t = std::clamp(dot(p - s.start, d) / len2, 0.0, 1.0);
  return distance(p, s.start + d * t);
}

inline double point_arc_distance(const Vec2& p, const Arc& a) {
  const Vec2 rel = p - a.disc.center;
  const double r = rel.norm();
  if (r <= 0.0) return a.disc.radius;
  if (a.contains_angle(rel.angle())) return std::abs(r - a.disc.radius);
  return std::min(distance(p, a.start_point()), distance(p, a.end_point()));
}

/// Minimum over the element of (distance to the disc center) - radius.
inline double element_disc_clearance(const PathElement& e, const Disc& d) {
  if (const auto* s = std::get_if<Segment>(&e)) return point_segment_distance(d.center, *s) - d.radius;
  return point_arc_distance(d.center, std::get<Arc>(e)) - d.radius;
}

/// Signed clearance of the whole path from a disc; negative is penetration depth.
inline double path_disc_clearance(const GeometricPath& path, const Disc& d) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : path.elements()) best = std::min(best, element_disc_clearance(e, d));
  return best;
}

inline double path_clearance(const GeometricPath& path, const std::vector<Disc>& discs) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& d : discs) best = std::min(best, path_disc_clearance(path, d));
  return best;
}

// ---------------------------------------------------------------------------
// Intersections

namespace detail {

inline void segment_segment_points(const Segment& a, const Segment& b, std::vector<Vec2>& out) {
  const Vec2 r = a.end - a.start;
  const Vec2 s = b.end - b.start;
  const double rl = r.norm();
  const double sl = s.norm();
  if (rl <= 0.0 || sl <= 0.0) return;
  const double denom = cross(r, s);
  const Vec2 qp = b.start - a.start;
  if (std::abs(denom) <= 1e-12 * rl * sl) {
    if (std::abs(cross(qp, r)) / rl > kGeomTol) return;  // parallel, not collinear
    const double t0 = dot(qp, r) / (rl * rl);
    const double t1 = dot(qp + s, r) / (rl * rl);
    const double lo = std::max(0.0, std::min(t0, t1));
    const double hi = std::min(1.0, std::max(t0, t1));
    if (lo > hi + kGeomTol / rl) return;
    out.push_back(a.start + r * lo);
    if (hi - lo > kGeomTol / rl) out.push_back(a.start + r * hi);
    return;
  }
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  const double tt = kGeomTol / rl;
  const double tu = kGeomTol / sl;
  if (t < -tt || t > 1.0 + tt || u < -tu || u > 1.0 + tu) return;
  out.push_back(a.start + r * std::clamp(t, 0.0, 1.0));
}

inline void segment_arc_points(const Segment& s, const Arc& arc, std::vector<Vec2>& out) {
  const Vec2 d = s.end - s.start;
  const double a = d.squared_norm();
  if (a <= 0.0) return;
  const Vec2 f = s.start - arc.disc.center;
  const double b = 2.0 * dot(f, d);
  const double c = f.squared_norm() - arc.disc.radius * arc.disc.radius;
  double disc = b * b - 4.0 * a * c;
  // Allow near-tangency within the geometric tolerance.
  const double slack = 4.0 * a * 2.0 * arc.disc.radius * kGeomTol;
  if (disc < -slack) return;
  disc = std::sqrt(std::max(0.0, disc));
  const double len = std::sqrt(a);
  const double tol_t = kGeomTol / len;
  const double ang_tol = kGeomTol / arc.disc.radius;
  const double roots[2] = {(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)};
  for (int i = 0; i < (disc == 0.0 ? 1 : 2); ++i) {
    const double t = roots[i];
    if (t < -tol_t || t > 1.0 + tol_t) continue;
    const Vec2 p = s.start + d * std::clamp(t, 0.0, 1.0);
    if (arc.contains_angle((p - arc.disc.center).angle(), ang_tol)) out.push_back(p);
  }
}

inline void arc_arc_points(const Arc& a1, const Arc& a2, std::vector<Vec2>& out) {
  const Vec2 delta = a2.disc.center - a1.disc.center;
  const double d = delta.norm();
  const double r1 = a1.disc.radius;
  const double r2 = a2.disc.radius;
  const double ang1 = kGeomTol / r1;
  const double ang2 = kGeomTol / r2;
  if (d <= kGeomTol && std::abs(r1 - r2) <= kGeomTol) {
    // Cocircular: overlap boundaries are arc endpoints contained in the other arc.
    for (const Vec2& p : {a1.start_point(), a1.end_point()}) {
      if (a2.contains_angle((p - a2.disc.center).angle(), ang2)) out.push_back(p);
    }
    for (const Vec2& p : {a2.start_point(), a2.end_point()}) {
      if (a1.contains_angle((p - a1.disc.center).angle(), ang1)) out.push_back(p);
    }
    return;
  }
  if (d <= kGeomTol) return;
  if (d > r1 + r2 + kGeomTol || d < std::abs(r1 - r2) - kGeomTol) return;
  const double along = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
  const double h = std::sqrt(std::max(0.0, r1 * r1 - along * along));
  const Vec2 e = delta / d;
  const Vec2 base = a1.disc.center + e * along;
  const int count = h <= kGeomTol ? 1 : 2;
  for (int i = 0; i < count; ++i) {
    const Vec2 p = base + e.perp() * (i == 0 ? h : -h);
    if (a1.contains_angle((p - a1.disc.center).angle(), ang1) &&
        a2.contains_angle((p - a2.disc.center).angle(), ang2)) {
      out.push_back(p);
    }
  }
}

}  // namespace detail

/// All intersection points of two elements. Overlapping collinear or cocircular
/// pieces are reported through the endpoints of the overlap.
inline std::vector<Vec2> element_intersections(const PathElement& a, const PathElement& b) {
  std::vector<Vec2> out;
  if (const auto* sa = std::get_if<Segment>(&a)) {
    if (const auto* sb = std::get_if<Segment>(&b)) {
      detail::segment_segment_points(*sa, *sb, out);
    } else {
      detail::segment_arc_points(*sa, std::get<Arc>(b), out);
    }
  } else if (const auto* sb = std::get_if<Segment>(&b)) {
    detail::segment_arc_points(*sb, std::get<Arc>(a), out);
  } else {
    detail::arc_arc_points(std::get<Arc>(a), std::get<Arc>(b), out);
  }
  return out;
}

struct SelfIntersection {
  bool found{false};
  std::optional<Vec2> point;
  std::size_t first{0};
  std::size_t second{0};
};

/// Checks every element pair. Adjacent elements may only meet at their shared
/// endpoint; any other common point counts as a self-intersection.
inline SelfIntersection self_intersects(const GeometricPath& path) {
  const auto& el = path.elements();
  for (std::size_t i = 0; i < el.size(); ++i) {
    for (std::size_t j = i + 1; j < el.size(); ++j) {
      const auto pts = element_intersections(el[i], el[j]);
      for (const Vec2& p : pts) {
        if (j == i + 1) {
          const Vec2 shared = element_end(el[i]);
          if (distance(p, shared) <= 1e-7) continue;
        }
        // Closed loops: the last element meets the first at the start point.
        if (i == 0 && j == el.size() - 1 && el.size() > 2 &&
            distance(element_start(el[0]), element_end(el[j])) <= kGeomTol &&
            distance(p, element_start(el[0])) <= 1e-7) {
          continue;
        }
        return {true, p, i, j};
      }
    }
  }
  return {};
}

/// Largest heading discontinuity (radians) between consecutive elements.
inline double max_kink(const GeometricPath& path) {
  double worst = 0.0;
  const auto& el = path.elements();
  for (std::size_t i = 1; i < el.size(); ++i) {
    if (element_length(el[i - 1]) <= kGeomTol || element_length(el[i]) <= kGeomTol) continue;
    const Vec2 t0 = element_tangent_at(el[i - 1], element_length(el[i - 1]));
    const Vec2 t1 = element_tangent_at(el[i], 0.0);
    worst = std::max(worst, std::abs(std::atan2(cross(t0, t1), dot(t0, t1))));
  }
  return worst;
}

/// Entry parameter in [0, 1] at which the segment enters the disc interior by
/// more than `tol`, if it does.
inline std::optional<double> segment_entry(const Segment& s, const Disc& d, double tol = kGeomTol) {
  if (point_segment_distance(d.center, s) >= d.radius - tol) return std::nullopt;
  const Vec2 dir = s.end - s.start;
  const double a = dir.squared_norm();
  if (a <= 0.0) return 0.0;
  const Vec2 f = s.start - d.center;
  const double b = 2.0 * dot(f, dir);
  const double c = f.squared_norm() - d.radius * d.radius;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  return std::clamp((-b - std::sqrt(disc)) / (2.0 * a), 0.0, 1.0);
}

}  // namespace htmpc

#endif  // HTMPC_GEOMETRY_HPP_
