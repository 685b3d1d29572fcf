#ifndef HTMPC_GAIN_HPP_
#define HTMPC_GAIN_HPP_

// Feedback gains for the ancillary control law, obtained from a discrete LQR
// on the robot model linearized about a reference point.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "htmpc/kinematics.hpp"

namespace htmpc {

struct LqrWeights {
  Eigen::Vector3d state{1.0, 1.0, 0.5};
  Eigen::Vector2d input{0.1, 0.1};
};

struct FeedbackGain {
  Matrix23 gain = Matrix23::Zero();
  Matrix3 a = Matrix3::Identity();
  Matrix32 b = Matrix32::Zero();
  double spectral_radius{1.0};
  bool stable{false};
  bool regularized{false};  // reference speed was lifted to keep the pair controllable
};

inline double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Whether u = K e makes the linearized error dynamics A + B K a contraction.
inline bool is_stabilizing(const Matrix3& a, const Matrix32& b, const Matrix23& k) {
  return spectral_radius(a + b * k) < 1.0;
}

/// Infinite-horizon discrete LQR gain by fixed-point iteration of the Riccati
/// equation. Sign convention: u = K e, closed loop A + B K.
inline Matrix23 dlqr(const Matrix3& a, const Matrix32& b, const Matrix3& q, const Eigen::Matrix2d& r,
                     int max_iterations = 2000, double tol = 1e-12) {
  Matrix3 p = q;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::Matrix2d s = r + b.transpose() * p * b;
    const Matrix23 k = s.ldlt().solve(b.transpose() * p * a);
    const Matrix3 next = q + a.transpose() * p * (a - b * k);
    const double delta = (next - p).cwiseAbs().maxCoeff();
    p = 0.5 * (next + next.transpose());
    if (delta < tol * std::max(1.0, p.cwiseAbs().maxCoeff())) break;
  }
  const Eigen::Matrix2d s = r + b.transpose() * p * b;
  return -s.ldlt().solve(b.transpose() * p * a);
}

/// Gain for one reference point. A reference speed too small to steer the
/// position through the heading is lifted to `min_speed` before linearizing.
inline FeedbackGain synthesize_gain(const Pose& ref_state, const Input& ref_input, double c,
                                    const LqrWeights& weights = {}, double min_speed = 0.05) {
  FeedbackGain out;
  Input lin = ref_input;
  if (std::abs(lin.v) < min_speed) {
    lin.v = lin.v < 0.0 ? -min_speed : min_speed;
    out.regularized = true;
  }
  out.a = state_jacobian(ref_state, lin, c);
  out.b = input_jacobian(ref_state, lin, c);
  Matrix3 q = weights.state.asDiagonal();
  Eigen::Matrix2d r = weights.input.asDiagonal();
  out.gain = dlqr(out.a, out.b, q, r);
  out.spectral_radius = spectral_radius(out.a + out.b * out.gain);
  // Retry with a cheaper input if the iteration stalled short of stability.
  for (int attempt = 0; attempt < 3 && out.spectral_radius >= 1.0; ++attempt) {
    r *= 0.1;
    out.gain = dlqr(out.a, out.b, q, r, 20000);
    out.spectral_radius = spectral_radius(out.a + out.b * out.gain);
  }
  out.stable = out.spectral_radius < 1.0;
  return out;
}

struct AncillaryResult {
  Input input;
  bool clamped{false};
};

/// u = u_ref + K (x - x_ref), clamped to the input box.
inline AncillaryResult ancillary_input(const Input& ref_input, const Matrix23& gain, const Pose& state,
                                       const Pose& ref_state, const InputBounds& bounds) {
  const Eigen::Vector2d du = gain * state_error(state, ref_state);
  const Input raw{ref_input.v + du(0), ref_input.omega + du(1)};
  const Input clamped = bounds.clamp(raw);
  return {clamped, !(clamped == raw)};
}

}  // namespace htmpc

#endif  // HTMPC_GAIN_HPP_
