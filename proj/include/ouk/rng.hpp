#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ouk/types.hpp"

namespace ouk {

/// Deterministic random source. Draws are built directly from mt19937_64
/// output so streams are identical across standard libraries; the library
/// distributions are implementation-defined and would break byte-for-byte
/// reproducibility of reports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0xC0FFEE) : eng_(seed) {}

  /// Uniform in (0, 1), never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vector uniform_vec(int n, double a, double b) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(a, b);
    return v;
  }

  Vector normal_vec(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ouk
