#ifndef HTMPC_PATTERN_SEARCH_HPP_
#define HTMPC_PATTERN_SEARCH_HPP_

// Derivative-free bound-constrained minimization: generalized pattern search
// with coordinate polling from several starting points. Constraints other than
// bounds are expected to be folded into the objective as penalties.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "htmpc/errors.hpp"
#include "htmpc/rng.hpp"

namespace htmpc {

struct SearchProblem {
  int dimension{0};
  std::function<double(const Eigen::VectorXd&)> evaluate;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<Eigen::VectorXd> starts;

  double initial_step{0.25};  // fraction of each bound range
  double min_step{1e-6};      // terminate once the mesh is finer than this
  int max_iterations{100000};
  // Budgets. `max_evaluations` <= 0 means unlimited. The clock is either the
  // wall clock or, when `seconds_per_evaluation` > 0, a modeled clock that
  // charges a fixed cost per evaluation (deterministic).
  std::int64_t max_evaluations{0};
  double budget_seconds{std::numeric_limits<double>::infinity()};
  double seconds_per_evaluation{0.0};
};

struct SearchResult {
  Eigen::VectorXd best;
  double best_value{std::numeric_limits<double>::infinity()};
  std::int64_t evaluations{0};
  bool converged{false};
  double elapsed{0.0};
  int best_start{-1};
  std::vector<double> history;  // best value after each evaluation
};

namespace detail {

class SearchClock {
 public:
  explicit SearchClock(const SearchProblem& p)
      : modeled_(p.seconds_per_evaluation > 0.0), cost_(p.seconds_per_evaluation),
        t0_(std::chrono::steady_clock::now()) {}

  double elapsed(std::int64_t evaluations) const {
    if (modeled_) return cost_ * static_cast<double>(evaluations);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  bool modeled_;
  double cost_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

inline bool within_bounds(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

/// Pattern search from every in-bounds start. Each poll tries +/- step along
/// every coordinate in order and moves to the first improvement; a successful
/// poll doubles the step, a failed one halves it.
inline SearchResult pattern_search(const SearchProblem& problem) {
  const int n = problem.dimension;
  if (n <= 0 || problem.lower.size() != n || problem.upper.size() != n) {
    throw ConfigError("pattern_search: dimension and bounds disagree");
  }
  if (!problem.lower.allFinite() || !problem.upper.allFinite() || (problem.lower.array() > problem.upper.array()).any()) {
    throw ConfigError("pattern_search: invalid bounds");
  }
  std::vector<int> valid;
  for (int i = 0; i < static_cast<int>(problem.starts.size()); ++i) {
    if (within_bounds(problem.starts[i], problem.lower, problem.upper)) valid.push_back(i);
  }
  if (valid.empty()) throw ConfigError("pattern_search: no start lies within the bounds");

  detail::SearchClock clock(problem);
  SearchResult result;
  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = problem.evaluate(x);
    ++result.evaluations;
    result.history.push_back(std::min(f, result.history.empty() ? f : result.history.back()));
    return f;
  };
  auto exhausted = [&] {
    if (problem.max_evaluations > 0 && result.evaluations >= problem.max_evaluations) return true;
    return clock.elapsed(result.evaluations) >= problem.budget_seconds;
  };
  auto improve = [&](const Eigen::VectorXd& x, double f, int start) {
    if (f < result.best_value) {
      result.best_value = f;
      result.best = x;
      result.best_start = start;
    }
  };

  // Starts are always evaluated so that the result is a genuine evaluation.
  std::vector<double> start_values;
  for (int i : valid) {
    start_values.push_back(eval(problem.starts[i]));
    improve(problem.starts[i], start_values.back(), i);
  }
  std::vector<int> order(valid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return start_values[a] < start_values[b]; });

  const Eigen::VectorXd range = problem.upper - problem.lower;
  bool all_converged = true;
  int iterations = 0;
  for (std::size_t s = 0; s < order.size(); ++s) {
    const int start = valid[order[s]];
    Eigen::VectorXd x = problem.starts[start];
    double fx = start_values[order[s]];
    double scale = problem.initial_step;
    // Later starts get what earlier ones left of the evaluation budget.
    const std::int64_t share =
        problem.max_evaluations > 0
            ? result.evaluations + (problem.max_evaluations - result.evaluations) / static_cast<std::int64_t>(order.size() - s)
            : std::numeric_limits<std::int64_t>::max();
    bool converged = false;
    while (!exhausted() && result.evaluations < share && iterations < problem.max_iterations) {
      if ((range * scale).maxCoeff() < problem.min_step) {
        converged = true;
        break;
      }
      ++iterations;
      bool success = false;
      for (int i = 0; i < n && !success; ++i) {
        const double h = range(i) * scale;
        if (h <= 0.0) continue;
        for (double dir : {1.0, -1.0}) {
          if (exhausted() || result.evaluations >= share) break;
          Eigen::VectorXd trial = x;
          trial(i) = std::clamp(x(i) + dir * h, problem.lower(i), problem.upper(i));
          if (trial(i) == x(i)) continue;
          const double ft = eval(trial);
          if (ft < fx) {
            x = std::move(trial);
            fx = ft;
            success = true;
            break;
          }
        }
      }
      scale = success ? std::min(1.0, 2.0 * scale) : 0.5 * scale;
    }
    if ((range * scale).maxCoeff() < problem.min_step) converged = true;
    improve(x, fx, start);
    all_converged = all_converged && converged;
  }
  result.converged = all_converged;
  result.elapsed = clock.elapsed(result.evaluations);
  return result;
}

/// Starting points: the shifted previous solution when given, then the
/// reference, then seeded uniform samples within the bounds.
inline std::vector<Eigen::VectorXd> make_starts(const std::optional<Eigen::VectorXd>& warm_start,
                                                const Eigen::VectorXd& reference, int count,
                                                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                                Rng& rng) {
  if (count < 1) throw ConfigError("make_starts: count must be >= 1");
  auto clip = [&](Eigen::VectorXd v) { return Eigen::VectorXd(v.cwiseMax(lower).cwiseMin(upper)); };
  std::vector<Eigen::VectorXd> out;
  if (warm_start) out.push_back(clip(*warm_start));
  if (static_cast<int>(out.size()) < count) out.push_back(clip(reference));
  while (static_cast<int>(out.size()) < count) {
    Eigen::VectorXd v(lower.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(lower(i), upper(i));
    out.push_back(v);
  }
  return out;
}

}  // namespace htmpc

#endif  // HTMPC_PATTERN_SEARCH_HPP_
