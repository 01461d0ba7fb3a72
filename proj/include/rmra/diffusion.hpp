#pragma once

// Point cloud -> Gaussian kernel -> doubly normalized symmetric diffusion
// operator W = D^{-1/2} (Dh^{-1} K Dh^{-1}) D^{-1/2}.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmra/linalg.hpp"

namespace rmra {

/// N points in R^d, one per row.
class Dataset {
 public:
  explicit Dataset(Matrix points, std::vector<long long> ids = {})
      : points_(std::move(points)), ids_(std::move(ids)) {
    if (points_.rows() < 2) {
      throw ValidationError("Dataset: need at least 2 points, got " +
                            std::to_string(points_.rows()));
    }
    if (points_.cols() < 1) throw ValidationError("Dataset: points have zero dimensions");
    detail::require_finite(points_, "Dataset");
    if (ids_.empty()) {
      ids_.resize(static_cast<std::size_t>(points_.rows()));
      for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = static_cast<long long>(i);
    } else if (ids_.size() != static_cast<std::size_t>(points_.rows())) {
      throw ValidationError("Dataset: " + std::to_string(ids_.size()) + " ids for " +
                            std::to_string(points_.rows()) + " points");
    }
  }

  Index n_points() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  const Matrix& points() const noexcept { return points_; }
  const std::vector<long long>& ids() const noexcept { return ids_; }

 private:
  Matrix points_;
  std::vector<long long> ids_;
};

enum class BandwidthRule { MedianTimesScale, Fixed };

struct KernelConfig {
  BandwidthRule rule = BandwidthRule::MedianTimesScale;
  double bandwidth_scale = 1.0;
  double sigma = 0.0;  // used when rule == Fixed

  static KernelConfig median_times(double scale) {
    return {BandwidthRule::MedianTimesScale, scale, 0.0};
  }
  static KernelConfig fixed(double sigma) { return {BandwidthRule::Fixed, 1.0, sigma}; }

  void validate() const {
    if (rule == BandwidthRule::MedianTimesScale && !(bandwidth_scale > 0.0 && std::isfinite(bandwidth_scale))) {
      throw ValidationError("bandwidth scale must be positive, got " +
                            detail::num(bandwidth_scale));
    }
    if (rule == BandwidthRule::Fixed && !(sigma > 0.0 && std::isfinite(sigma))) {
      throw ValidationError("fixed sigma must be positive, got " + detail::num(sigma));
    }
  }
};

/// Squared Euclidean distances. Each pair is summed coordinate by coordinate
/// in a fixed order, so the result is exactly symmetric with a zero diagonal.
inline SymmetricMatrix pairwise_sq_dists(const Dataset& ds) {
  const Matrix& x = ds.points();
  const Index n = x.rows();
  Matrix d2 = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  return SymmetricMatrix(d2);
}

/// Lower median of sqrt(D2[i][j]) over i < j.
inline double median_distance(const SymmetricMatrix& d2) {
  const Index n = d2.dim();
  if (n < 2) throw ValidationError("median_distance: need at least 2 points");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      if (d2(i, j) < 0.0) throw ValidationError("median_distance: negative squared distance");
      d.push_back(std::sqrt(d2(i, j)));
    }
  }
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>((d.size() - 1) / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

struct Kernel {
  SymmetricMatrix K;
  double sigma = 0.0;
};

/// K[i][j] = exp(-D2[i][j] / sigma^2).
inline Kernel gaussian_kernel(const SymmetricMatrix& d2, const KernelConfig& cfg = {}) {
  cfg.validate();
  double sigma = cfg.sigma;
  if (cfg.rule == BandwidthRule::MedianTimesScale) {
    const double med = median_distance(d2);
    if (!(med > 0.0)) {
      throw ValidationError(
          "median pairwise distance is 0 (points coincide); supply a fixed sigma instead");
    }
    sigma = med * cfg.bandwidth_scale;
  }
  const double inv = 1.0 / (sigma * sigma);
  Matrix k = (-inv * d2.matrix().array()).exp().matrix();
  k.diagonal().setOnes();
  return {SymmetricMatrix(k), sigma};
}

struct DiffusionOperator {
  SymmetricMatrix W;
  Vector d;      // row sums of the first normalization
  Vector d_hat;  // row sums of K
  double sigma = 0.0;
};

inline DiffusionOperator normalize_kernel(const SymmetricMatrix& k) {
  const Vector d_hat = k.matrix().rowwise().sum();
  if (!(d_hat.minCoeff() > 0.0)) {
    throw NumericalError("normalize_kernel: kernel has a non-positive row sum");
  }
  const Vector inv_hat = d_hat.cwiseInverse();
  const Matrix w_hat = inv_hat.asDiagonal() * k.matrix() * inv_hat.asDiagonal();
  const Vector d = w_hat.rowwise().sum();
  if (!(d.minCoeff() > 0.0)) {
    throw NumericalError("normalize_kernel: normalized kernel has a non-positive row sum");
  }
  const Vector inv_sqrt = d.cwiseSqrt().cwiseInverse();
  Matrix w = inv_sqrt.asDiagonal() * w_hat * inv_sqrt.asDiagonal();
  return {SymmetricMatrix(w), d, d_hat, 0.0};
}

inline DiffusionOperator diffusion_operator(const Dataset& ds, const KernelConfig& cfg = {}) {
  const Kernel kernel = gaussian_kernel(pairwise_sq_dists(ds), cfg);
  DiffusionOperator op = normalize_kernel(kernel.K);
  op.sigma = kernel.sigma;
  return op;
}

/// Eigenvectors of the row-stochastic diffusion-maps operator D^{-1} W_hat
/// obtained from those of W: right = D^{-1/2} psi, left = D^{1/2} psi.
struct DiffusionMapsVectors {
  Vector values;
  Matrix right;
  Matrix left;
};

inline DiffusionMapsVectors dm_eigenvectors(const EigenSystem& w_eig, const Vector& d) {
  detail::require_same_dim(w_eig.dim(), d.size(), "dm_eigenvectors");
  if (!(d.minCoeff() > 0.0)) throw ValidationError("dm_eigenvectors: degrees must be positive");
  const Vector root = d.cwiseSqrt();
  return {w_eig.values, root.cwiseInverse().asDiagonal() * w_eig.vectors,
          root.asDiagonal() * w_eig.vectors};
}

}  // namespace rmra
