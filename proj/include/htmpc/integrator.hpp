#ifndef HTMPC_INTEGRATOR_HPP_
#define HTMPC_INTEGRATOR_HPP_

#include <array>
#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <utility>

#include "htmpc/errors.hpp"

namespace htmpc {

class PropagationError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline bool all_finite(double v) { return std::isfinite(v); }

template <typename T, std::size_t N>
bool all_finite(const std::array<T, N>& v) {
  for (const T& x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

template <typename S>
S axpy(const S& y, double h, const S& k) {
  if constexpr (std::is_arithmetic_v<S>) {
    return y + h * k;
  } else {
    S out = y;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * k[i];
    return out;
  }
}

}  // namespace detail

/// One step of the classical Runge-Kutta 3/8 rule for y' = f(t, y).
/// `S` is a scalar or a std::array of doubles.
template <typename S, typename F>
S rk38_step(F&& f, double t, const S& y, double h) {
  if (!(h > 0.0)) throw PropagationError("rk38_step: step must be positive");
  const S k1 = f(t, y);
  const S k2 = f(t + h / 3.0, detail::axpy(y, h / 3.0, k1));
  S y3 = detail::axpy(y, -h / 3.0, k1);
  y3 = detail::axpy(y3, h, k2);
  const S k3 = f(t + 2.0 * h / 3.0, y3);
  S y4 = detail::axpy(y, h, k1);
  y4 = detail::axpy(y4, -h, k2);
  y4 = detail::axpy(y4, h, k3);
  const S k4 = f(t + h, y4);
  S out = detail::axpy(y, h / 8.0, k1);
  out = detail::axpy(out, 3.0 * h / 8.0, k2);
  out = detail::axpy(out, 3.0 * h / 8.0, k3);
  out = detail::axpy(out, h / 8.0, k4);
  if (!detail::all_finite(k1) || !detail::all_finite(k2) || !detail::all_finite(k3) ||
      !detail::all_finite(k4)) {
    throw PropagationError("rk38_step: non-finite derivative");
  }
  return out;
}

/// Scalar convenience form, integrating from t = 0 across one step of size c.
template <typename F>
double rk38_integrate(F&& f, double value, double c) {
  return rk38_step<double>(std::forward<F>(f), 0.0, value, c);
}

}  // namespace htmpc

#endif  // HTMPC_INTEGRATOR_HPP_
