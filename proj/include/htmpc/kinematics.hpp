#ifndef HTMPC_KINEMATICS_HPP_
#define HTMPC_KINEMATICS_HPP_

// Discrete-time differential-drive kinematics. The heading of the previous
// step is used throughout the sampling interval; the lateral term c*omega*v
// accounts for the rotation during the interval.

#include <Eigen/Dense>

#include "htmpc/geometry.hpp"

namespace htmpc {

struct Pose {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

struct Input {
  double v{0.0};
  double omega{0.0};

  double squared_norm() const { return v * v + omega * omega; }
  bool operator==(const Input&) const = default;
};

inline Input operator-(const Input& a, const Input& b) { return {a.v - b.v, a.omega - b.omega}; }

struct InputBounds {
  Input min{0.0, -1.0};
  Input max{1.0, 1.0};

  Input clamp(const Input& u) const {
    return {std::clamp(u.v, min.v, max.v), std::clamp(u.omega, min.omega, max.omega)};
  }
  bool operator==(const InputBounds&) const = default;

  bool contains(const Input& u, double tol = 0.0) const {
    return u.v >= min.v - tol && u.v <= max.v + tol && u.omega >= min.omega - tol &&
           u.omega <= max.omega + tol;
  }
};

/// One step of the robot model under input `u` with sampling time `c`.
inline Pose step_pose(const Pose& p, const Input& u, double c) {
  const double cs = std::cos(p.theta);
  const double sn = std::sin(p.theta);
  const double turn = c * u.omega * u.v;
  return {p.x + c * (u.v * cs - turn * sn), p.y + c * (u.v * sn + turn * cs),
          normalize_angle(p.theta + c * u.omega)};
}

/// Heading-aware difference x - ref with the angle wrapped to (-pi, pi].
inline Eigen::Vector3d state_error(const Pose& x, const Pose& ref) {
  return {x.x - ref.x, x.y - ref.y, normalize_angle(x.theta - ref.theta)};
}

using Matrix3 = Eigen::Matrix3d;
using Matrix32 = Eigen::Matrix<double, 3, 2>;
using Matrix23 = Eigen::Matrix<double, 2, 3>;

/// Jacobian of step_pose with respect to the state.
inline Matrix3 state_jacobian(const Pose& p, const Input& u, double c) {
  const double cs = std::cos(p.theta);
  const double sn = std::sin(p.theta);
  const double turn = c * u.omega;
  Matrix3 a = Matrix3::Identity();
  a(0, 2) = -c * u.v * (sn + turn * cs);
  a(1, 2) = c * u.v * (cs - turn * sn);
  return a;
}

/// Jacobian of step_pose with respect to the input.
inline Matrix32 input_jacobian(const Pose& p, const Input& u, double c) {
  const double cs = std::cos(p.theta);
  const double sn = std::sin(p.theta);
  const double turn = c * u.omega;
  Matrix32 b = Matrix32::Zero();
  b(0, 0) = c * (cs - turn * sn);
  b(1, 0) = c * (sn + turn * cs);
  b(0, 1) = -c * c * u.v * sn;
  b(1, 1) = c * c * u.v * cs;
  b(2, 1) = c;
  return b;
}

}  // namespace htmpc

#endif  // HTMPC_KINEMATICS_HPP_
