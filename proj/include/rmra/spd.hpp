#pragma once

// Affine-invariant Riemannian geometry on the cone of SPD matrices.
// Every operation works through congruences W^{-1/2} X W^{-1/2}, symmetric
// eigendecompositions and SVDs, never general solves.

#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "rmra/linalg.hpp"

namespace rmra {

/// Position along a geodesic, p in [0, 1]. Defaults to the midpoint.
class GeodesicParam {
 public:
  constexpr GeodesicParam() = default;

  explicit GeodesicParam(double p) : p_(p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("geodesic parameter must lie in [0, 1], got " + detail::num(p));
    }
  }

  static constexpr GeodesicParam midpoint() { return GeodesicParam(); }

  constexpr double value() const noexcept { return p_; }

 private:
  double p_ = 0.5;
};

/// Base points with cond > kMaxCondition are refused.
inline constexpr double kMaxCondition = 1e12;

inline void require_conditioned(const SpdMatrix& w, const char* what) {
  const double cond = w.condition();
  if (!(cond <= kMaxCondition)) {
    throw ConditioningError(std::string(what) + ": condition number " + detail::num(cond) +
                            " exceeds " + detail::num(kMaxCondition) +
                            "; use the fixed-rank SPSD path");
  }
}

namespace detail {

// With Z = V^{1/2} W^{-1/2} = U Sigma Q^T we have W^{-1/2} V W^{-1/2} = Z^T Z
// = Q Sigma^2 Q^T, so any function of the congruence is read off the singular
// values of Z. Its condition number is the square root of the congruence's,
// which keeps small eigen-directions accurate when W and V are ill-conditioned.
struct RelativeFactor {
  SymmetricMatrix w_half;
  Matrix Q;
  Vector sigma;
};

inline RelativeFactor relative_factor(const SpdMatrix& w, const SpdMatrix& v) {
  const Matrix z = sqrtm(v).matrix() * invsqrtm(w).matrix();
  Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("relative_factor: SVD failed");
  return {sqrtm(w), svd.matrixV(), svd.singularValues()};
}

// Q diag(f(sigma)) Q^T placed back by the congruence with W^{1/2}.
template <class F>
SymmetricMatrix relative_apply(const RelativeFactor& rf, F&& f, const char* name) {
  Vector fv(rf.sigma.size());
  for (Index k = 0; k < fv.size(); ++k) {
    fv[k] = f(rf.sigma[k]);
    if (!std::isfinite(fv[k])) {
      throw DomainError(std::string(name) + " undefined at singular value " + num(rf.sigma[k]));
    }
  }
  const SymmetricMatrix inner(Matrix(rf.Q * fv.asDiagonal() * rf.Q.transpose()));
  return congruence(rf.w_half.matrix(), inner);
}

}  // namespace detail

/// W1^{1/2} (W1^{-1/2} W2 W1^{-1/2})^p W1^{1/2}.
inline SpdMatrix geodesic(const SpdMatrix& w1, const SpdMatrix& w2, GeodesicParam p = {}) {
  detail::require_same_dim(w1.dim(), w2.dim(), "geodesic");
  require_conditioned(w1, "geodesic");
  if (p.value() == 0.0) return w1;
  if (p.value() == 1.0) return w2;
  const double two_p = 2.0 * p.value();
  return SpdMatrix(detail::relative_apply(
      detail::relative_factor(w1, w2), [two_p](double s) { return std::pow(s, two_p); },
      "geodesic power"));
}

/// Two-matrix Frechet mean under the affine-invariant metric.
inline SpdMatrix midpoint(const SpdMatrix& w1, const SpdMatrix& w2) {
  return geodesic(w1, w2, GeodesicParam::midpoint());
}

/// || log(W1^{-1/2} W2 W1^{-1/2}) ||_F
inline double riemannian_distance(const SpdMatrix& w1, const SpdMatrix& w2) {
  detail::require_same_dim(w1.dim(), w2.dim(), "riemannian_distance");
  require_conditioned(w1, "riemannian_distance");
  const Matrix z = sqrtm(w2).matrix() * invsqrtm(w1).matrix();
  const Vector sigma = Eigen::BDCSVD<Matrix>(z).singularValues();
  if (!(sigma.minCoeff() > 0.0)) throw DomainError("riemannian_distance: singular congruence");
  return 2.0 * sigma.array().log().matrix().norm();
}

/// Exp_W(D) = W^{1/2} exp(W^{-1/2} D W^{-1/2}) W^{1/2}.
inline SpdMatrix exp_map(const SpdMatrix& w, const SymmetricMatrix& tangent) {
  detail::require_same_dim(w.dim(), tangent.dim(), "exp_map");
  require_conditioned(w, "exp_map");
  const SymmetricMatrix inner = congruence(invsqrtm(w).matrix(), tangent);
  return SpdMatrix(congruence(sqrtm(w).matrix(), expm(inner)));
}

/// Log_W(V) = W^{1/2} log(W^{-1/2} V W^{-1/2}) W^{1/2}.
inline SymmetricMatrix log_map(const SpdMatrix& w, const SpdMatrix& v) {
  detail::require_same_dim(w.dim(), v.dim(), "log_map");
  require_conditioned(w, "log_map");
  return detail::relative_apply(
      detail::relative_factor(w, v), [](double s) { return 2.0 * std::log(s); }, "log");
}

}  // namespace rmra
