#pragma once

// Seeded randomness with a portable output sequence: mt19937_64 is fully
// specified by the standard, and the conversions below avoid the
// implementation-defined std distributions.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "rmra/linalg.hpp"

namespace rmra {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Standard normal (Box-Muller, both outputs used).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * std::numbers::pi * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Matrix gaussian(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index c = 0; c < cols; ++c) {
      for (Index r = 0; r < rows; ++r) m(r, c) = normal();
    }
    return m;
  }

  /// exp of a uniform draw between log(lo) and log(hi).
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Modified Gram-Schmidt, two passes, on the columns of a seeded Gaussian.
inline Matrix orthonormalize_columns(Matrix a) {
  for (Index k = 0; k < a.cols(); ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < k; ++j) a.col(k) -= a.col(j).dot(a.col(k)) * a.col(j);
    }
    const double norm = a.col(k).norm();
    if (!(norm > 1e-12)) throw NumericalError("orthonormalize_columns: rank-deficient input");
    a.col(k) /= norm;
  }
  return a;
}

inline Matrix random_orthonormal(Index n, Index cols, Rng& rng) {
  return orthonormalize_columns(rng.gaussian(n, cols));
}

inline Matrix random_orthonormal(Index n, Rng& rng) { return random_orthonormal(n, n, rng); }

}  // namespace rmra
