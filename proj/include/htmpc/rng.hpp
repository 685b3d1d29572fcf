#ifndef HTMPC_RNG_HPP_
#define HTMPC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace htmpc {

/// Seeded random source. Distributions are computed by hand instead of through
/// <random> distribution objects so that streams are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream derived from a base seed and a stream label.
  static Rng stream(std::uint64_t seed, std::uint64_t label) {
    return Rng(splitmix(seed ^ splitmix(label + 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  /// Uniform point in a disc of the given radius centered at the origin.
  template <typename V>
  V in_disc(double radius) {
    const double r = radius * std::sqrt(uniform());
    const double a = 2.0 * std::numbers::pi * uniform();
    return V{r * std::cos(a), r * std::sin(a)};
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace htmpc

#endif  // HTMPC_RNG_HPP_
