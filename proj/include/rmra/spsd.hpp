#pragma once

// Fixed-rank SPSD geometry: a rank-r matrix is carried as (V, Lambda) with
// orthonormal V (N x r) and SPD Lambda (r x r). Geodesics are approximated by
// moving the range along a Grassmann geodesic and the r x r core along the
// SPD geodesic.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "rmra/linalg.hpp"
#include "rmra/spd.hpp"

namespace rmra {

/// Retained eigenvalues must exceed this fraction of the largest one.
inline constexpr double kDefaultRankThreshold = 1e-10;
/// Zero angles: 1/sin(theta) is replaced by 0 below this sine.
inline constexpr double kPinvSineFloor = 1e-12;
inline constexpr double kOrthonormalTol = 1e-10;

class RankPolicy {
 public:
  static RankPolicy fixed(Index r) {
    if (r < 1) throw ValidationError("rank must be at least 1, got " + std::to_string(r));
    RankPolicy p;
    p.rank_ = r;
    return p;
  }

  static RankPolicy relative(double threshold = kDefaultRankThreshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
      throw ValidationError("relative rank threshold must lie in (0, 1), got " +
                            detail::num(threshold));
    }
    RankPolicy p;
    p.threshold_ = threshold;
    return p;
  }

  bool is_fixed() const noexcept { return rank_ > 0; }
  Index rank() const noexcept { return rank_; }
  double threshold() const noexcept { return threshold_; }

 private:
  Index rank_ = 0;
  double threshold_ = kDefaultRankThreshold;
};

/// W = V Lambda V^T with V^T V = I_r and Lambda SPD.
class SpsdFactors {
 public:
  SpsdFactors(Matrix v, SpdMatrix lambda) : v_(std::move(v)), lambda_(std::move(lambda)) {
    if (v_.cols() != lambda_.dim()) {
      throw ValidationError("SpsdFactors: V has " + std::to_string(v_.cols()) +
                            " columns but Lambda is " + std::to_string(lambda_.dim()) + "x" +
                            std::to_string(lambda_.dim()));
    }
    if (v_.cols() > v_.rows()) throw ValidationError("SpsdFactors: rank exceeds dimension");
    const double drift = (v_.transpose() * v_ - Matrix::Identity(v_.cols(), v_.cols())).norm();
    if (!(drift <= kOrthonormalTol)) {
      throw ValidationError("SpsdFactors: V is not orthonormal (||V^T V - I||_F = " +
                            detail::num(drift) + ")");
    }
  }

  /// Diagonal core, values strictly positive.
  SpsdFactors(Matrix v, const Vector& diag)
      : SpsdFactors(std::move(v), SpdMatrix(SymmetricMatrix::diagonal(diag))) {}

  Index n() const noexcept { return v_.rows(); }
  Index rank() const noexcept { return v_.cols(); }
  const Matrix& V() const noexcept { return v_; }
  const SpdMatrix& Lambda() const noexcept { return lambda_; }

  SymmetricMatrix dense() const { return congruence(v_, lambda_.symmetric()); }

  /// Same matrix with a diagonal, descending core: V <- V Q, Lambda <- D.
  SpsdFactors canonical() const {
    const EigenSystem& es = lambda_.eigen();
    return SpsdFactors(Matrix(v_ * es.vectors), es.values);
  }

  /// Best rank-r approximation (top r eigenpairs).
  SpsdFactors truncated(Index r) const {
    if (r < 1 || r > rank()) {
      throw ValidationError("cannot truncate rank " + std::to_string(rank()) + " factors to " +
                            std::to_string(r));
    }
    const EigenSystem& es = lambda_.eigen();
    return SpsdFactors(Matrix(v_ * es.vectors.leftCols(r)), Vector(es.values.head(r)));
  }

 private:
  Matrix v_;
  SpdMatrix lambda_;
};

/// Top-r eigenpairs of a PSD matrix. Small negative drift down to
/// -1e-10 * lambda_max is tolerated outside the retained block.
inline SpsdFactors spsd_factorize(const EigenSystem& es,
                                  RankPolicy policy = RankPolicy::relative()) {
  if (es.ordering != Ordering::ByValueDesc) {
    throw ValidationError("spsd_factorize: needs a value-ordered decomposition");
  }
  const double top = es.values[0];
  if (!(top > 0.0)) throw ValidationError("spsd_factorize: matrix has no positive eigenvalue");
  const double bottom = es.values[es.dim() - 1];
  if (bottom < -kDefaultRankThreshold * top) {
    throw ValidationError("spsd_factorize: eigenvalue " + detail::num(bottom) +
                          " is below the PSD drift floor " +
                          detail::num(-kDefaultRankThreshold * top));
  }
  const double floor = (policy.is_fixed() ? kDefaultRankThreshold : policy.threshold()) * top;
  const auto available = static_cast<Index>(
      std::count_if(es.values.data(), es.values.data() + es.dim(),
                    [floor](double v) { return v > floor; }));
  Index r = available;
  if (policy.is_fixed()) {
    if (policy.rank() > available) {
      throw ValidationError("spsd_factorize: requested rank " + std::to_string(policy.rank()) +
                            " exceeds numerically available rank " + std::to_string(available));
    }
    r = policy.rank();
  }
  return SpsdFactors(Matrix(es.vectors.leftCols(r)), Vector(es.values.head(r)));
}

inline SpsdFactors spsd_factorize(const SymmetricMatrix& m,
                                  RankPolicy policy = RankPolicy::relative()) {
  return spsd_factorize(sym_eig(m, Ordering::ByValueDesc), policy);
}

/// SVD V2^T V1 = O2 Sigma O1^T with Sigma descending; Theta = arccos(Sigma).
struct PrincipalAngles {
  Matrix O1;
  Matrix O2;
  Vector sigma;
  Vector theta;
};

namespace detail {

inline void require_orthonormal(const Matrix& v, const char* what) {
  const double drift = (v.transpose() * v - Matrix::Identity(v.cols(), v.cols())).norm();
  if (!(drift <= 1e-8)) {
    throw ValidationError(std::string(what) + ": columns are not orthonormal (drift " +
                          num(drift) + ")");
  }
}

// Thin QR with the R diagonal made non-negative, so Q stays close to the input
// when the input is already nearly orthonormal.
inline Matrix reorthonormalize(const Matrix& u) {
  Eigen::HouseholderQR<Matrix> qr(u);
  Matrix q = qr.householderQ() * Matrix::Identity(u.rows(), u.cols());
  const Matrix& packed = qr.matrixQR();
  for (Index k = 0; k < u.cols(); ++k) {
    if (packed(k, k) < 0.0) q.col(k) *= -1.0;
  }
  return q;
}

}  // namespace detail

inline PrincipalAngles principal_angles(const Matrix& v1, const Matrix& v2) {
  if (v1.rows() != v2.rows() || v1.cols() != v2.cols()) {
    throw ValidationError("principal_angles: shape mismatch");
  }
  detail::require_orthonormal(v1, "principal_angles(V1)");
  detail::require_orthonormal(v2, "principal_angles(V2)");
  const Matrix overlap = v2.transpose() * v1;
  Eigen::BDCSVD<Matrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PrincipalAngles pa;
  pa.O2 = svd.matrixU();
  pa.O1 = svd.matrixV();
  pa.sigma = svd.singularValues().cwiseMax(0.0).cwiseMin(1.0);
  pa.theta = pa.sigma.unaryExpr([](double s) { return std::acos(s); });
  return pa;
}

/// U(p) = U1 cos(Theta p) + X sin(Theta p), X = (I - U1 U1^T) U2 sin(Theta)^+,
/// re-orthonormalized.
inline Matrix grassmann_geodesic(const PrincipalAngles& pa, const Matrix& v1, const Matrix& v2,
                                 GeodesicParam p) {
  const Matrix u1 = v1 * pa.O1;
  const Matrix u2 = v2 * pa.O2;
  Matrix x = u2 - u1 * (u1.transpose() * u2);
  const Index r = pa.theta.size();
  for (Index k = 0; k < r; ++k) {
    const double s = std::sin(pa.theta[k]);
    x.col(k) *= (s < kPinvSineFloor) ? 0.0 : 1.0 / s;
  }
  const Vector cos_p = (pa.theta * p.value()).array().cos();
  const Vector sin_p = (pa.theta * p.value()).array().sin();
  return detail::reorthonormalize(u1 * cos_p.asDiagonal() + x * sin_p.asDiagonal());
}

/// Pieces of the approximate SPSD geodesic between two equal-rank factors.
struct SpsdGeodesicParts {
  Matrix U;  // U(p), N x r
  SpdMatrix R;   // R1 #_p R2
  SpdMatrix R1;  // O1^T Lambda1 O1
  SpdMatrix R2;  // O2^T Lambda2 O2
  PrincipalAngles angles;
};

namespace detail {

inline void require_matched(const SpsdFactors& a, const SpsdFactors& b, const char* what) {
  require_same_dim(a.n(), b.n(), what);
  if (a.rank() != b.rank()) {
    throw ValidationError(std::string(what) + ": rank mismatch (" + std::to_string(a.rank()) +
                          " vs " + std::to_string(b.rank()) +
                          "); re-factorize both at the smaller rank");
  }
}

}  // namespace detail

inline SpsdGeodesicParts spsd_geodesic_parts(const SpsdFactors& w1, const SpsdFactors& w2,
                                             GeodesicParam p) {
  detail::require_matched(w1, w2, "spsd_geodesic");
  PrincipalAngles pa = principal_angles(w1.V(), w2.V());
  Matrix u = grassmann_geodesic(pa, w1.V(), w2.V(), p);
  SpdMatrix r1(congruence(pa.O1.transpose(), w1.Lambda().symmetric()));
  SpdMatrix r2(congruence(pa.O2.transpose(), w2.Lambda().symmetric()));
  SpdMatrix r = geodesic(r1, r2, p);
  return {std::move(u), std::move(r), std::move(r1), std::move(r2), std::move(pa)};
}

/// U(p) (R1 #_p R2) U(p)^T, returned with a diagonal core.
inline SpsdFactors spsd_geodesic(const SpsdFactors& w1, const SpsdFactors& w2,
                                 GeodesicParam p) {
  const SpsdGeodesicParts parts = spsd_geodesic_parts(w1, w2, p);
  const EigenSystem& es = parts.R.eigen();
  return SpsdFactors(Matrix(parts.U * es.vectors), es.values);
}

inline SpsdFactors spsd_compose_S(const SpsdFactors& w1, const SpsdFactors& w2) {
  return spsd_geodesic(w1, w2, GeodesicParam::midpoint());
}

/// F = U_{S->W1}(1) Log_{R_S}(R_W1) U_{S->W1}(1)^T.
inline SymmetricMatrix spsd_compose_F(const SpsdFactors& s, const SpsdFactors& w1) {
  const SpsdGeodesicParts parts = spsd_geodesic_parts(s, w1, GeodesicParam(1.0));
  return congruence(parts.U, log_map(parts.R1, parts.R2));
}

/// Truncate both factors to the smaller of the two ranks.
inline std::pair<SpsdFactors, SpsdFactors> match_rank(const SpsdFactors& a,
                                                      const SpsdFactors& b) {
  const Index r = std::min(a.rank(), b.rank());
  return {a.rank() == r ? a : a.truncated(r), b.rank() == r ? b : b.truncated(r)};
}

}  // namespace rmra
