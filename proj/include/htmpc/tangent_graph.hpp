#ifndef HTMPC_TANGENT_GRAPH_HPP_
#define HTMPC_TANGENT_GRAPH_HPP_

// Exact shortest paths among circular obstacles: Dijkstra over the graph of
// common tangents (edges between circles) and boundary arcs (edges along a
// circle). Overlapping circles are handled as unions because tangent points and
// arcs buried inside another circle are dropped.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "htmpc/geometry.hpp"

namespace htmpc {

namespace detail {

inline bool blocked_by_barrier(const PathElement& e, const std::vector<Segment>& barriers) {
  for (const Segment& b : barriers) {
    if (!element_intersections(e, PathElement{b}).empty()) return true;
  }
  return false;
}

inline Orientation travel_orientation(const Vec2& touch, const Vec2& center, const Vec2& dir) {
  return cross(touch - center, dir) > 0.0 ? Orientation::kCcw : Orientation::kCw;
}

}  // namespace detail

/// Shortest path from `start` to `goal` avoiding the interiors of `discs` and
/// not crossing any `barriers`. Returns nullopt when no path exists.
/// Both endpoints must lie outside every disc.
class TangentGraph {
 public:
  TangentGraph(const Vec2& start, const Vec2& goal, const std::vector<Disc>& discs,
               const std::vector<Segment>& barriers = {})
      : start_(start), goal_(goal), discs_(discs), barriers_(barriers) {
    for (const Disc& d : discs_) {
      if (d.contains(start_) || d.contains(goal_)) {
        throw GeometryError("TangentGraph: endpoint inside an obstacle");
      }
    }
  }

  std::optional<GeometricPath> solve() {
    build();
    return search();
  }

 private:
  struct TouchPoint {
    int disc;
    double angle;
    Vec2 p;
  };
  struct Edge {
    int to;
    double weight;
    bool arc;
    Vec2 a;        // segment start
    Vec2 b;        // segment end
    int disc;      // arc disc
    double from_angle;
    double sweep;
  };

  static constexpr int kStart = 0;
  static constexpr int kGoal = 1;

  int node(int touch, Orientation o) const { return 2 + 2 * touch + (o == Orientation::kCw ? 1 : 0); }

  bool point_free(const Vec2& p, int own) const {
    for (std::size_t k = 0; k < discs_.size(); ++k) {
      if (static_cast<int>(k) == own) continue;
      if (discs_[k].contains(p)) return false;
    }
    return true;
  }

  bool segment_free(const Segment& s) const {
    for (const Disc& d : discs_) {
      if (element_disc_clearance(PathElement{s}, d) < -kGeomTol) return false;
    }
    return !detail::blocked_by_barrier(PathElement{s}, barriers_);
  }

  bool arc_free(const Arc& a, int own) const {
    for (std::size_t k = 0; k < discs_.size(); ++k) {
      if (static_cast<int>(k) == own) continue;
      if (element_disc_clearance(PathElement{a}, discs_[k]) < -kGeomTol) return false;
    }
    return !detail::blocked_by_barrier(PathElement{a}, barriers_);
  }

  int add_touch(int disc, const Vec2& p) {
    touches_.push_back({disc, (p - discs_[disc].center).angle(), p});
    return static_cast<int>(touches_.size()) - 1;
  }

  void add_segment_edge(int from, int to, const Vec2& a, const Vec2& b) {
    adjacency_[from].push_back({to, distance(a, b), false, a, b, -1, 0.0, 0.0});
  }

  void build() {
    const int n = static_cast<int>(discs_.size());
    struct Pending {
      int from, to;
      Vec2 a, b;
    };
    std::vector<Pending> segments;

    const Segment direct{start_, goal_};
    if (segment_free(direct)) segments.push_back({kStart, kGoal, start_, goal_});

    for (int i = 0; i < n; ++i) {
      for (const auto& [p, t] : point_tangents(start_, discs_[i])) {
        if (!point_free(t, i) || !segment_free({p, t})) continue;
        const int id = add_touch(i, t);
        segments.push_back({kStart, node(id, detail::travel_orientation(t, discs_[i].center, t - p)), p, t});
      }
      for (const auto& [p, t] : point_tangents(goal_, discs_[i])) {
        if (!point_free(t, i) || !segment_free({t, p})) continue;
        const int id = add_touch(i, t);
        segments.push_back({node(id, detail::travel_orientation(t, discs_[i].center, p - t)), kGoal, t, p});
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Disc& di = discs_[i];
        const Disc& dj = discs_[j];
        if (distance(di.center, dj.center) <= kGeomTol && std::abs(di.radius - dj.radius) <= kGeomTol) continue;
        for (const auto& [pi, pj] : tangent_lines(di, dj)) {
          if (distance(pi, pj) <= kGeomTol) continue;
          if (!point_free(pi, i) || !point_free(pj, j) || !segment_free({pi, pj})) continue;
          const int ti = add_touch(i, pi);
          const int tj = add_touch(j, pj);
          const Vec2 d = pj - pi;
          const Orientation oi = detail::travel_orientation(pi, di.center, d);
          const Orientation oj = detail::travel_orientation(pj, dj.center, d);
          segments.push_back({node(ti, oi), node(tj, oj), pi, pj});
          segments.push_back({node(tj, opposite(oj)), node(ti, opposite(oi)), pj, pi});
        }
      }
    }

    adjacency_.assign(2 + 2 * touches_.size(), {});
    for (const Pending& s : segments) add_segment_edge(s.from, s.to, s.a, s.b);

    // Arc edges between angularly consecutive touch points of each disc.
    std::vector<std::vector<int>> per_disc(n);
    for (int t = 0; t < static_cast<int>(touches_.size()); ++t) per_disc[touches_[t].disc].push_back(t);
    for (int i = 0; i < n; ++i) {
      auto& ids = per_disc[i];
      if (ids.size() < 2) continue;
      std::sort(ids.begin(), ids.end(), [&](int a, int b) { return touches_[a].angle < touches_[b].angle; });
      for (std::size_t k = 0; k < ids.size(); ++k) {
        const int a = ids[k];
        const int b = ids[(k + 1) % ids.size()];
        const double span = wrap_two_pi(touches_[b].angle - touches_[a].angle);
        const Arc arc{discs_[i], touches_[a].angle, span};
        if (!arc_free(arc, i)) continue;
        const double w = discs_[i].radius * span;
        adjacency_[node(a, Orientation::kCcw)].push_back(
            {node(b, Orientation::kCcw), w, true, {}, {}, i, touches_[a].angle, span});
        adjacency_[node(b, Orientation::kCw)].push_back(
            {node(a, Orientation::kCw), w, true, {}, {}, i, touches_[b].angle, -span});
      }
    }
  }

  std::optional<GeometricPath> search() const {
    const std::size_t count = adjacency_.size();
    std::vector<double> dist(count, std::numeric_limits<double>::infinity());
    std::vector<std::pair<int, int>> pred(count, {-1, -1});
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[kStart] = 0.0;
    queue.push({0.0, kStart});
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[u]) continue;
      if (u == kGoal) break;
      for (std::size_t e = 0; e < adjacency_[u].size(); ++e) {
        const Edge& edge = adjacency_[u][e];
        const double nd = d + edge.weight;
        if (nd < dist[edge.to]) {
          dist[edge.to] = nd;
          pred[edge.to] = {u, static_cast<int>(e)};
          queue.push({nd, edge.to});
        }
      }
    }
    if (!std::isfinite(dist[kGoal])) return std::nullopt;

    std::vector<const Edge*> chain;
    for (int v = kGoal; v != kStart; v = pred[v].first) chain.push_back(&adjacency_[pred[v].first][pred[v].second]);
    std::reverse(chain.begin(), chain.end());

    std::vector<PathElement> elements;
    for (const Edge* e : chain) {
      if (!e->arc) {
        elements.emplace_back(Segment{e->a, e->b});
        continue;
      }
      if (!elements.empty()) {
        if (auto* prev = std::get_if<Arc>(&elements.back());
            prev != nullptr && prev->disc == discs_[e->disc] && (prev->sweep >= 0.0) == (e->sweep >= 0.0)) {
          prev->sweep += e->sweep;
          continue;
        }
      }
      elements.emplace_back(Arc{discs_[e->disc], e->from_angle, e->sweep});
    }
    // Drop zero-length arcs left by coincident touch points.
    std::erase_if(elements, [](const PathElement& el) {
      const auto* a = std::get_if<Arc>(&el);
      return a != nullptr && a->length() <= kGeomTol;
    });
    return GeometricPath(std::move(elements));
  }

  Vec2 start_;
  Vec2 goal_;
  std::vector<Disc> discs_;
  std::vector<Segment> barriers_;
  std::vector<TouchPoint> touches_;
  std::vector<std::vector<Edge>> adjacency_;
};

inline std::optional<GeometricPath> shortest_path(const Vec2& start, const Vec2& goal,
                                                  const std::vector<Disc>& discs,
                                                  const std::vector<Segment>& barriers = {}) {
  return TangentGraph(start, goal, discs, barriers).solve();
}

}  // namespace htmpc

#endif  // HTMPC_TANGENT_GRAPH_HPP_
