#pragma once

// Synthetic data: the 4x4 toy pairs, the time-dependent double gyre and the
// pair of 3-tori embedded in R^4.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "rmra/diffusion.hpp"
#include "rmra/parallel.hpp"
#include "rmra/random.hpp"

namespace rmra {

struct ToyPair {
  SymmetricMatrix M1;
  SymmetricMatrix M2;
  Matrix Psi;
  Vector lambda1;
  Vector lambda2;
};

inline Matrix toy_basis() {
  Matrix psi(4, 4);
  psi << 1, 1, 1, 1,
         1, 1, -1, -1,
         1, -1, -1, 1,
         1, -1, 1, -1;
  return 0.5 * psi;
}

namespace detail {

inline ToyPair toy_pair(const Vector& l1, const Vector& l2) {
  const Matrix psi = toy_basis();
  return {congruence(psi, SymmetricMatrix::diagonal(l1)),
          congruence(psi, SymmetricMatrix::diagonal(l2)), psi, l1, l2};
}

}  // namespace detail

inline ToyPair toy_spd_pair() {
  return detail::toy_pair(Vector{{0.5, 1.0, 0.01, 0.2}}, Vector{{0.01, 1.0, 0.5, 0.2}});
}

/// Same as the SPD pair with the fourth eigenvalue set to zero (rank 3).
inline ToyPair toy_spsd_pair() {
  return detail::toy_pair(Vector{{0.5, 1.0, 0.01, 0.0}}, Vector{{0.01, 1.0, 0.5, 0.0}});
}

enum class Integrator { RK4, Euler };

struct GyreConfig {
  Index N = 2500;
  Index T = 256;
  double dt = 1.0 / 256.0;  // spacing between frames
  double max_step = 1.0 / 256.0;  // each frame interval is split into steps no longer than this
  double c1 = 2.0;
  double c2 = 10.0;
  std::uint64_t seed = 0;
  Integrator integrator = Integrator::RK4;
  std::optional<double> frozen_g;  // evaluate the field with a constant g

  void validate() const {
    if (N < 1 || T < 2) throw ValidationError("gyre: need N >= 1 and T >= 2");
    if (!(dt > 0.0) || !(max_step > 0.0)) throw ValidationError("gyre: steps must be positive");
  }

  int substeps() const {
    return std::max(1, static_cast<int>(std::ceil(dt / max_step - 1e-9)));
  }
};

/// g(t) = t^2 (3 - 2t)
inline double gyre_g(double t) { return t * t * (3.0 - 2.0 * t); }

/// (dx/dt, dy/dt) = (-dH/dy, dH/dx) with H = (1-g) c1 sin(2 pi x) sin(pi y)
/// + g c2 sin(pi x) sin(2 pi y).
inline Eigen::Vector2d gyre_velocity(double x, double y, double g, double c1, double c2) {
  constexpr double pi = std::numbers::pi;
  const double a = (1.0 - g) * c1;
  const double b = g * c2;
  const double vx = -(a * pi * std::sin(2 * pi * x) * std::cos(pi * y) +
                      b * 2 * pi * std::sin(pi * x) * std::cos(2 * pi * y));
  const double vy = a * 2 * pi * std::cos(2 * pi * x) * std::sin(pi * y) +
                    b * pi * std::cos(pi * x) * std::sin(2 * pi * y);
  return {vx, vy};
}

inline double gyre_hamiltonian(double x, double y, double g, double c1, double c2) {
  constexpr double pi = std::numbers::pi;
  return (1.0 - g) * c1 * std::sin(2 * pi * x) * std::sin(pi * y) +
         g * c2 * std::sin(pi * x) * std::sin(2 * pi * y);
}

/// Frame k (0-based) holds the positions at time k * dt.
struct TrajectorySet {
  std::vector<double> times;
  std::vector<Matrix> frames;  // T entries, each N x 2
  Matrix initial;              // N x 2

  Index N() const { return initial.rows(); }
  Index T() const { return static_cast<Index>(frames.size()); }
};

inline TrajectorySet double_gyre(const GyreConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  Rng rng(cfg.seed);
  Matrix start(cfg.N, 2);
  for (Index i = 0; i < cfg.N; ++i) {
    start(i, 0) = rng.uniform();
    start(i, 1) = rng.uniform();
  }
  TrajectorySet out;
  out.initial = start;
  out.frames.assign(static_cast<std::size_t>(cfg.T), Matrix(cfg.N, 2));
  for (Index k = 0; k < cfg.T; ++k) out.times.push_back(static_cast<double>(k) * cfg.dt);

  const int sub = cfg.substeps();
  const double h = cfg.dt / sub;
  auto field = [&](double x, double y, double t) {
    const double g = cfg.frozen_g ? *cfg.frozen_g : gyre_g(t);
    return gyre_velocity(x, y, g, cfg.c1, cfg.c2);
  };
  parallel_for(static_cast<std::size_t>(cfg.N), threads, [&](std::size_t idx) {
    const auto i = static_cast<Index>(idx);
    Eigen::Vector2d p = start.row(i).transpose();
    out.frames[0].row(i) = p.transpose();
    for (Index k = 1; k < cfg.T; ++k) {
      const double t0 = static_cast<double>(k - 1) * cfg.dt;
      for (int s = 0; s < sub; ++s) {
        const double t = t0 + s * h;
        if (cfg.integrator == Integrator::Euler) {
          p += h * field(p.x(), p.y(), t);
          continue;
        }
        const Eigen::Vector2d k1 = field(p.x(), p.y(), t);
        const Eigen::Vector2d q2 = p + 0.5 * h * k1;
        const Eigen::Vector2d k2 = field(q2.x(), q2.y(), t + 0.5 * h);
        const Eigen::Vector2d q3 = p + 0.5 * h * k2;
        const Eigen::Vector2d k3 = field(q3.x(), q3.y(), t + 0.5 * h);
        const Eigen::Vector2d q4 = p + h * k3;
        const Eigen::Vector2d k4 = field(q4.x(), q4.y(), t + h);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      out.frames[static_cast<std::size_t>(k)].row(i) = p.transpose();
    }
  });
  return out;
}

enum class TorusVariant { Common, Unique };

struct TorusConfig {
  Index N = 2000;
  double r = 2.0;
  double R = 7.0;
  double Rt = 15.0;
  std::uint64_t seed = 0;
  TorusVariant variant = TorusVariant::Common;

  void validate() const {
    if (N < 2) throw ValidationError("tori: need N >= 2");
    if (!(0.0 < r && r < R && R < Rt)) throw ValidationError("tori: need 0 < r < R < Rt");
  }
};

struct ToriData {
  Dataset X1;
  Dataset X2;
  Matrix angles;  // N x 4: theta1..theta4
};

/// Point on the 3-torus in R^4 with inner angle a, middle angle b, outer angle c.
inline Eigen::Vector4d torus_point(double a, double b, double c, double r, double R, double Rt) {
  const double ring = R + r * std::cos(b);
  const double outer = Rt + ring * std::cos(a);
  return {outer * std::cos(c), outer * std::sin(c), ring * std::sin(a), r * std::sin(b)};
}

/// X1 uses (theta1, theta2, theta3); X2 swaps theta1 and theta2 and, in the
/// Unique variant, replaces theta3 by theta4.
inline ToriData tori(const TorusConfig& cfg) {
  cfg.validate();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Rng rng(cfg.seed);
  Matrix angles(cfg.N, 4);
  for (Index i = 0; i < cfg.N; ++i) {
    for (Index a = 0; a < 4; ++a) angles(i, a) = two_pi * rng.uniform();
  }
  Matrix x1(cfg.N, 4);
  Matrix x2(cfg.N, 4);
  for (Index i = 0; i < cfg.N; ++i) {
    const double t1 = angles(i, 0);
    const double t2 = angles(i, 1);
    const double t3 = angles(i, 2);
    const double outer2 = cfg.variant == TorusVariant::Common ? t3 : angles(i, 3);
    x1.row(i) = torus_point(t1, t2, t3, cfg.r, cfg.R, cfg.Rt).transpose();
    x2.row(i) = torus_point(t2, t1, outer2, cfg.r, cfg.R, cfg.Rt).transpose();
  }
  return {Dataset(x1), Dataset(x2), angles};
}

}  // namespace rmra
