#pragma once

// Dense symmetric matrices, deterministic eigendecomposition and spectral
// matrix functions (sqrt, inverse sqrt, log, exp, real powers).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rmra/error.hpp"

namespace rmra {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw ValidationError(std::string(what) + ": expected a square matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + ": matrix has non-finite entries");
}

inline void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

}  // namespace detail

/// Real symmetric N x N matrix. Symmetry is enforced exactly on construction
/// by averaging with the transpose.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  explicit SymmetricMatrix(const Matrix& m) {
    detail::require_square(m, "SymmetricMatrix");
    detail::require_finite(m, "SymmetricMatrix");
    m_ = 0.5 * (m + m.transpose());
  }

  static SymmetricMatrix zero(Index n) { return SymmetricMatrix(Matrix::Zero(n, n), Trusted{}); }
  static SymmetricMatrix identity(Index n) {
    return SymmetricMatrix(Matrix::Identity(n, n), Trusted{});
  }
  static SymmetricMatrix diagonal(const Vector& d) {
    return SymmetricMatrix(Matrix(d.asDiagonal()));
  }

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

  SymmetricMatrix operator-() const { return SymmetricMatrix(Matrix(-m_), Trusted{}); }
  friend SymmetricMatrix operator*(double s, const SymmetricMatrix& a) {
    return SymmetricMatrix(Matrix(s * a.m_), Trusted{});
  }

 private:
  struct Trusted {};
  SymmetricMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// (M + M^T) / 2.
inline SymmetricMatrix symmetrize(const Matrix& m) { return SymmetricMatrix(m); }

enum class Ordering { ByValueDesc, ByAbsValueDesc };

/// Relative gap below which neighbouring eigenvalues are treated as one cluster.
inline constexpr double kDegenerateGap = 1e-10;

/// Full spectral decomposition. Column k of `vectors` belongs to `values[k]`.
struct EigenSystem {
  Vector values;
  Matrix vectors;
  Ordering ordering = Ordering::ByValueDesc;
  // cluster[k] identifies the numerically degenerate group of values[k];
  // indices sharing an id span a subspace, not individual directions.
  std::vector<Index> cluster;

  Index dim() const noexcept { return values.size(); }

  Matrix reconstruct() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }

  bool is_degenerate(Index k) const {
    return std::count(cluster.begin(), cluster.end(), cluster[static_cast<std::size_t>(k)]) > 1;
  }
};

namespace detail {

// Flip each column so that its entry of largest magnitude is non-negative.
// Near-ties (within 1e-8 relative) resolve to the lowest row index so that
// rounding noise cannot flip the choice.
inline void fix_signs(Matrix& v) {
  for (Index c = 0; c < v.cols(); ++c) {
    const double peak = v.col(c).cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    for (Index r = 0; r < v.rows(); ++r) {
      if (std::abs(v(r, c)) >= peak * (1.0 - 1e-8)) {
        if (v(r, c) < 0.0) v.col(c) *= -1.0;
        break;
      }
    }
  }
}

inline std::vector<Index> clusters_of(const Vector& values) {
  const Index n = values.size();
  std::vector<Index> cluster(static_cast<std::size_t>(n), 0);
  if (n == 0) return cluster;
  const double scale = values.cwiseAbs().maxCoeff();
  const double gap = kDegenerateGap * (scale > 0.0 ? scale : 1.0);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values[a] > values[b]; });
  Index id = 0;
  cluster[static_cast<std::size_t>(order[0])] = id;
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (values[order[k - 1]] - values[order[k]] >= gap) ++id;
    cluster[static_cast<std::size_t>(order[k])] = id;
  }
  return cluster;
}

}  // namespace detail

/// Eigen's self-adjoint solver gives up after this many sweeps per eigenvalue.
inline constexpr int kEigenIterationsPerValue = 30;

/// Symmetric eigendecomposition with deterministic ordering and signs.
/// ByAbsValueDesc breaks ties in |value| by signed value, then by index.
inline EigenSystem sym_eig(const SymmetricMatrix& m, Ordering ordering = Ordering::ByValueDesc) {
  const Index n = m.dim();
  EigenSystem out;
  out.ordering = ordering;
  if (n == 0) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("sym_eig: implicit QR did not converge within " +
                           std::to_string(kEigenIterationsPerValue * n) + " iterations (N=" +
                           std::to_string(n) + ")");
  }
  const Vector& raw_values = solver.eigenvalues();  // ascending
  const Matrix& raw_vectors = solver.eigenvectors();

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  if (ordering == Ordering::ByValueDesc) {
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      if (raw_values[a] != raw_values[b]) return raw_values[a] > raw_values[b];
      return a < b;
    });
  } else {
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      const double fa = std::abs(raw_values[a]);
      const double fb = std::abs(raw_values[b]);
      if (fa != fb) return fa > fb;
      if (raw_values[a] != raw_values[b]) return raw_values[a] > raw_values[b];
      return a < b;
    });
  }

  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.values[k] = raw_values[src];
    out.vectors.col(k) = raw_vectors.col(src);
  }
  detail::fix_signs(out.vectors);
  out.cluster = detail::clusters_of(out.values);
  return out;
}

/// Symmetric positive-definite matrix. The smallest eigenvalue must exceed
/// `min_eig_tol` (default 1e-12 * largest eigenvalue); violations throw.
/// The eigendecomposition computed for validation is kept and reused by the
/// spectral functions below.
class SpdMatrix {
 public:
  static constexpr double kDefaultRelativeTol = 1e-12;

  explicit SpdMatrix(SymmetricMatrix m, std::optional<double> min_eig_tol = std::nullopt)
      : base_(std::move(m)) {
    eig_ = sym_eig(base_, Ordering::ByValueDesc);
    validate(min_eig_tol);
  }

  explicit SpdMatrix(const Matrix& m, std::optional<double> min_eig_tol = std::nullopt)
      : SpdMatrix(SymmetricMatrix(m), min_eig_tol) {}

  /// Adopt an eigendecomposition already computed by sym_eig(m, ByValueDesc).
  static SpdMatrix from_eigensystem(SymmetricMatrix m, EigenSystem eig,
                                    std::optional<double> min_eig_tol = std::nullopt) {
    if (eig.ordering != Ordering::ByValueDesc || eig.dim() != m.dim()) {
      throw ValidationError("SpdMatrix: eigensystem does not match the matrix");
    }
    return SpdMatrix(std::move(m), std::move(eig), min_eig_tol);
  }

  const SymmetricMatrix& symmetric() const noexcept { return base_; }
  const Matrix& matrix() const noexcept { return base_.matrix(); }
  Index dim() const noexcept { return base_.dim(); }
  const EigenSystem& eigen() const noexcept { return eig_; }
  double min_eig_tol() const noexcept { return tol_; }
  double lambda_max() const { return eig_.values[0]; }
  double lambda_min() const { return eig_.values[eig_.dim() - 1]; }
  double condition() const { return lambda_max() / lambda_min(); }

 private:
  SpdMatrix(SymmetricMatrix m, EigenSystem eig, std::optional<double> tol)
      : base_(std::move(m)), eig_(std::move(eig)) {
    validate(tol);
  }

  void validate(std::optional<double> min_eig_tol) {
    if (base_.dim() == 0) throw ValidationError("SpdMatrix: empty matrix");
    const double top = lambda_max();
    if (!(top > 0.0)) {
      throw ValidationError("SpdMatrix: largest eigenvalue " + detail::num(top) +
                            " is not positive");
    }
    tol_ = min_eig_tol.value_or(kDefaultRelativeTol * top);
    if (!(lambda_min() > tol_)) {
      throw ValidationError("SpdMatrix: smallest eigenvalue " + detail::num(lambda_min()) +
                            " is not above the positivity tolerance " + detail::num(tol_));
    }
  }

  SymmetricMatrix base_;
  EigenSystem eig_;
  double tol_ = 0.0;
};

/// V f(Lambda) V^T for a decomposition already at hand.
template <class F>
SymmetricMatrix spectral_apply(const EigenSystem& es, F&& f, const char* name = "f") {
  Vector fv(es.dim());
  for (Index k = 0; k < es.dim(); ++k) {
    fv[k] = f(es.values[k]);
    if (!std::isfinite(fv[k])) {
      throw DomainError(std::string(name) + " is undefined at eigenvalue " +
                        detail::num(es.values[k]) + " (index " + std::to_string(k) + ")");
    }
  }
  return SymmetricMatrix(Matrix(es.vectors * fv.asDiagonal() * es.vectors.transpose()));
}

template <class F>
SymmetricMatrix matrix_function(const SymmetricMatrix& m, F&& f, const char* name = "f") {
  return spectral_apply(sym_eig(m), std::forward<F>(f), name);
}

template <class F>
SymmetricMatrix matrix_function(const SpdMatrix& m, F&& f, const char* name = "f") {
  return spectral_apply(m.eigen(), std::forward<F>(f), name);
}

inline SymmetricMatrix sqrtm(const SpdMatrix& m) {
  return matrix_function(m, [](double x) { return std::sqrt(x); }, "sqrt");
}
inline SymmetricMatrix sqrtm(const SymmetricMatrix& m) {
  return matrix_function(m, [](double x) { return std::sqrt(x); }, "sqrt");
}

inline SymmetricMatrix invsqrtm(const SpdMatrix& m) {
  return matrix_function(m, [](double x) { return 1.0 / std::sqrt(x); }, "inverse sqrt");
}

inline SymmetricMatrix logm(const SpdMatrix& m) {
  return matrix_function(m, [](double x) { return std::log(x); }, "log");
}
inline SymmetricMatrix logm(const SymmetricMatrix& m) {
  return matrix_function(m, [](double x) { return std::log(x); }, "log");
}

inline SymmetricMatrix expm(const SymmetricMatrix& m) {
  return matrix_function(m, [](double x) { return std::exp(x); }, "exp");
}

inline SymmetricMatrix powm(const SpdMatrix& m, double p) {
  return matrix_function(m, [p](double x) { return std::pow(x, p); }, "power");
}
inline SymmetricMatrix powm(const SymmetricMatrix& m, double p) {
  return matrix_function(m, [p](double x) { return std::pow(x, p); }, "power");
}

/// A B A^T, re-symmetrized.
inline SymmetricMatrix congruence(const Matrix& a, const SymmetricMatrix& b) {
  return SymmetricMatrix(Matrix(a * b.matrix() * a.transpose()));
}

inline double relative_frobenius(const Matrix& a, const Matrix& reference) {
  const double denom = reference.norm();
  const double diff = (a - reference).norm();
  return denom > 0.0 ? diff / denom : diff;
}

/// Frobenius distance between orthogonal projectors onto span(a) and span(b);
/// both inputs must have orthonormal columns.
inline double projector_distance(const Matrix& a, const Matrix& b) {
  return (a * a.transpose() - b * b.transpose()).norm();
}

/// Largest principal angle between span(a) and span(b) (orthonormal columns,
/// same column count). Computed through the sine so small angles stay accurate.
inline double max_principal_angle(const Matrix& a, const Matrix& b) {
  const Matrix residual = b - a * (a.transpose() * b);
  const double s = residual.cols() == 0
                       ? 0.0
                       : Eigen::JacobiSVD<Matrix>(residual).singularValues()(0);
  return std::asin(std::min(1.0, s));
}

}  // namespace rmra
