#ifndef HTMPC_TUBE_HPP_
#define HTMPC_TUBE_HPP_

#include <cstdint>

#include "htmpc/errors.hpp"

namespace htmpc {

struct TubeParams {
  double robot_bound{0.01};     // per-step disturbance bound on the robot position
  double robot_damping{0.2};    // in [0, 1]
  double obstacle_bound{0.05};  // perception error bound on dynamic obstacles
  double obstacle_damping{0.2}; // in [0, 1]

  bool operator==(const TubeParams&) const = default;
};

/// Worst-case deviation bound k - kappa steps into the prediction window:
/// bound * sum_{i=0}^{k-kappa-1} (1 - damping)^i.
inline double tube_width(std::int64_t k, std::int64_t kappa, double bound, double damping) {
  if (k <= kappa) throw ConfigError("tube_width: k must exceed the current step");
  if (damping < 0.0 || damping > 1.0) throw ConfigError("tube_width: damping outside [0, 1]");
  if (bound < 0.0) throw ConfigError("tube_width: negative bound");
  double sum = 0.0;
  double term = 1.0;
  for (std::int64_t i = 0; i < k - kappa; ++i) {
    sum += term;
    term *= 1.0 - damping;
  }
  return bound * sum;
}

inline double tube_width_robot(std::int64_t k, std::int64_t kappa, const TubeParams& p) {
  return tube_width(k, kappa, p.robot_bound, p.robot_damping);
}

inline double tube_width_obstacle(std::int64_t k, std::int64_t kappa, const TubeParams& p) {
  return tube_width(k, kappa, p.obstacle_bound, p.obstacle_damping);
}

}  // namespace htmpc

#endif  // HTMPC_TUBE_HPP_
