#pragma once

// Executable oracles: build operator pairs with known spectral structure and
// measure how far S and F are from the closed-form predictions.

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rmra/composite.hpp"
#include "rmra/datagen.hpp"
#include "rmra/random.hpp"

namespace rmra {

/// W_k = Psi diag(lambda_k) Psi^T with a shared orthonormal Psi.
struct CommonSpectrumSpec {
  Matrix Psi;
  Vector lambda1;
  Vector lambda2;

  Index n() const { return Psi.rows(); }

  void validate() const {
    const Index n = Psi.rows();
    if (Psi.cols() != n || lambda1.size() != n || lambda2.size() != n || n < 1) {
      throw ValidationError("CommonSpectrumSpec: inconsistent sizes");
    }
    const double drift = (Psi.transpose() * Psi - Matrix::Identity(n, n)).norm();
    if (!(drift <= 1e-10)) {
      throw ValidationError("CommonSpectrumSpec: Psi not orthonormal (drift " +
                            detail::num(drift) + ")");
    }
    for (const Vector* l : {&lambda1, &lambda2}) {
      if (!((l->array() > 0.0).all() && (l->array() <= 1.0).all())) {
        throw ValidationError("CommonSpectrumSpec: eigenvalues must lie in (0, 1]");
      }
    }
  }
};

/// Random Psi and eigenvalues log-uniform in [lo, hi].
inline CommonSpectrumSpec random_common_spec(Index n, std::uint64_t seed, double lo = 1e-3,
                                             double hi = 1.0) {
  Rng rng(seed);
  CommonSpectrumSpec spec;
  spec.Psi = random_orthonormal(n, rng);
  spec.lambda1.resize(n);
  spec.lambda2.resize(n);
  for (Index i = 0; i < n; ++i) spec.lambda1[i] = rng.log_uniform(lo, hi);
  for (Index i = 0; i < n; ++i) spec.lambda2[i] = rng.log_uniform(lo, hi);
  return spec;
}

inline SpdMatrix spd_from(const Matrix& basis, const Vector& values) {
  return SpdMatrix(congruence(basis, SymmetricMatrix::diagonal(values)));
}

inline std::pair<SpdMatrix, SpdMatrix> make_common_pair(const CommonSpectrumSpec& spec) {
  spec.validate();
  return {spd_from(spec.Psi, spec.lambda1), spd_from(spec.Psi, spec.lambda2)};
}

struct Report {
  std::string oracle;
  Index instances = 0;
  double max_residual = 0.0;
  double budget = 0.0;
  bool pass = true;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["oracle"] = oracle;
    j["instances"] = instances;
    j["max_residual"] = max_residual;
    j["budget"] = budget;
    j["pass"] = pass;
    if (!details.empty()) j["details"] = details;
    return j;
  }

  /// Fold another report of the same oracle into this one.
  void absorb(const Report& r) {
    instances += r.instances;
    max_residual = std::max(max_residual, r.max_residual);
    budget = std::max(budget, r.budget);
    pass = pass && r.pass;
  }
};

/// Distance between two expected-vs-computed spectra matched position by
/// position after sorting, and the worst eigenspace angle. Indices whose
/// expected value lies within `cluster_gap` of a neighbour are compared as
/// subspaces through principal angles.
struct SpectrumMatch {
  double value_residual = 0.0;
  double angle_residual = 0.0;
};

inline SpectrumMatch match_spectrum(const EigenSystem& computed, const Vector& expected,
                                    const Matrix& expected_vectors, double cluster_gap = 1e-8) {
  const Index n = expected.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return expected[a] > expected[b]; });
  SpectrumMatch out;
  // computed is value-ordered, so position k pairs with order[k].
  for (Index k = 0; k < n; ++k) {
    out.value_residual = std::max(
        out.value_residual, std::abs(computed.values[k] - expected[order[static_cast<std::size_t>(k)]]));
  }
  Index start = 0;
  while (start < n) {
    Index end = start + 1;
    while (end < n && expected[order[static_cast<std::size_t>(end - 1)]] -
                              expected[order[static_cast<std::size_t>(end)]] <
                          cluster_gap) {
      ++end;
    }
    Matrix want(n, end - start);
    for (Index k = start; k < end; ++k) {
      want.col(k - start) = expected_vectors.col(order[static_cast<std::size_t>(k)]);
    }
    const Matrix got = computed.vectors.middleCols(start, end - start);
    out.angle_residual = std::max(out.angle_residual, max_principal_angle(want, got));
    start = end;
  }
  return out;
}

inline constexpr double kCommonValueTol = 1e-9;
inline constexpr double kCommonAngleTol = 1e-7;
inline constexpr double kSignThreshold = 1e-8;

/// S eigenvalues against sqrt(lambda1 lambda2) on the shared eigenvectors.
inline Report check_common_S(const SpdMatrix& w1, const SpdMatrix& w2, const Matrix& psi,
                             const Vector& lambda1, const Vector& lambda2) {
  const SpdMatrix s = compose_S(w1, w2);
  const Vector expected = (lambda1.array() * lambda2.array()).sqrt();
  const SpectrumMatch m = match_spectrum(s.eigen(), expected, psi);
  Report r;
  r.oracle = "common_S";
  r.instances = 1;
  r.max_residual = m.value_residual;
  r.budget = kCommonValueTol;
  r.details["max_angle"] = m.angle_residual;
  r.details["angle_budget"] = kCommonAngleTol;
  r.pass = m.value_residual <= kCommonValueTol && m.angle_residual <= kCommonAngleTol;
  return r;
}

inline Vector common_F_values(const Vector& lambda1, const Vector& lambda2) {
  return (0.5 * (lambda1.array() * lambda2.array()).sqrt() *
          (lambda1.array().log() - lambda2.array().log()))
      .matrix();
}

/// F eigenvalues against 0.5 sqrt(l1 l2) log(l1 / l2), plus the sign rule read
/// off the Rayleigh quotients psi_i^T F psi_i.
inline Report check_common_F(const SpdMatrix& w1, const SpdMatrix& w2, const Matrix& psi,
                             const Vector& lambda1, const Vector& lambda2) {
  const SymmetricMatrix f = compose_F(w1, w2);
  const Vector expected = common_F_values(lambda1, lambda2);
  const SpectrumMatch m = match_spectrum(sym_eig(f), expected, psi);
  Index sign_errors = 0;
  Index sign_checked = 0;
  for (Index i = 0; i < psi.cols(); ++i) {
    const double gap = lambda1[i] - lambda2[i];
    if (std::abs(gap) <= kSignThreshold) continue;
    ++sign_checked;
    const double rq = psi.col(i).dot(f.matrix() * psi.col(i));
    if ((gap > 0.0) != (rq > 0.0)) ++sign_errors;
  }
  Report r;
  r.oracle = "common_F";
  r.instances = 1;
  r.max_residual = m.value_residual;
  r.budget = kCommonValueTol;
  r.details["max_angle"] = m.angle_residual;
  r.details["sign_checked"] = sign_checked;
  r.details["sign_errors"] = sign_errors;
  r.pass = m.value_residual <= kCommonValueTol && sign_errors == 0;
  return r;
}

namespace detail {

inline void require_unit(const Vector& v, const char* what) {
  if (!(std::abs(v.norm() - 1.0) <= 1e-10)) {
    throw ValidationError(std::string(what) + ": vector is not unit norm (norm " +
                          num(v.norm()) + ")");
  }
}

}  // namespace detail

/// ||(M - lam I) v||_2 for a unit vector v.
inline double pseudo_residual(const SymmetricMatrix& m, double lam, const Vector& v) {
  detail::require_same_dim(m.dim(), v.size(), "pseudo_residual");
  detail::require_unit(v, "pseudo_residual");
  return (m.matrix() * v - lam * v).norm();
}

/// B = -(M - lam I) v v^T, so that (M + B) v = lam v and ||B|| equals the
/// pseudo-residual.
inline Matrix rank_one_completion(const SymmetricMatrix& m, double lam, const Vector& v) {
  detail::require_same_dim(m.dim(), v.size(), "rank_one_completion");
  detail::require_unit(v, "rank_one_completion");
  return -(m.matrix() * v - lam * v) * v.transpose();
}

/// Perturbed-eigenvector instance: W2 = Psi diag(lambda2) Psi^T and W1 shares
/// every eigenvector except column j, which is rotated by the largest
/// perturbation the budget allows.
struct PerturbedPair {
  SpdMatrix W1;
  SpdMatrix W2;
  Vector psi1;        // perturbed eigenvector of W1
  double budget = 0;  // allowed ||psi1 - psi2||
  double perturbation = 0;
};

inline PerturbedPair make_perturbed_pair(const CommonSpectrumSpec& spec, Index j, double eps,
                                         std::uint64_t seed) {
  spec.validate();
  const Index n = spec.n();
  if (j < 0 || j >= n) throw ValidationError("make_perturbed_pair: index out of range");
  if (n < 2) throw ValidationError("make_perturbed_pair: need N >= 2");
  const double l1 = spec.lambda1[j];
  const double l2 = spec.lambda2[j];
  const double spread = (spec.lambda2.array() - l2).abs().maxCoeff();
  if (!(spread > 0.0)) {
    throw ValidationError("make_perturbed_pair: ||W2 - lambda2 I|| is zero, budget undefined");
  }
  const double budget = std::sqrt(l2) / (spread * std::sqrt(l1)) * eps;
  // ||psi1 - psi2|| = 2 sin(phi / 2); capped at a right angle.
  const double size = std::min(budget, std::sqrt(2.0));
  const double phi = 2.0 * std::asin(size / 2.0);

  Rng rng(seed);
  const Vector psi2 = spec.Psi.col(j);
  Vector u = rng.gaussian(n, 1).col(0);
  for (int pass = 0; pass < 2; ++pass) u -= psi2.dot(u) * psi2;
  u.normalize();
  const Vector psi1 = std::cos(phi) * psi2 + std::sin(phi) * u;

  Matrix basis(n, n);
  basis.col(0) = psi1;
  Index c = 1;
  for (Index k = 0; k < n; ++k) {
    if (k != j) basis.col(c++) = spec.Psi.col(k);
  }
  basis = orthonormalize_columns(basis);
  Matrix u1(n, n);
  u1.col(j) = basis.col(0);
  c = 1;
  for (Index k = 0; k < n; ++k) {
    if (k != j) u1.col(k) = basis.col(c++);
  }
  return {spd_from(u1, spec.lambda1), spd_from(spec.Psi, spec.lambda2), u1.col(j), budget,
          (u1.col(j) - psi2).norm()};
}

/// Pseudo-eigenvector check for S at the midpoint: residual <= eps + 10 eps^2.
inline Report check_pseudo_S(const CommonSpectrumSpec& spec, Index j, double eps,
                             std::uint64_t seed) {
  const PerturbedPair pp = make_perturbed_pair(spec, j, eps, seed);
  const SpdMatrix s = compose_S(pp.W1, pp.W2);
  const double lam = std::sqrt(spec.lambda1[j] * spec.lambda2[j]);
  Report r;
  r.oracle = "pseudo_S";
  r.instances = 1;
  r.max_residual = pseudo_residual(s.symmetric(), lam, pp.psi1);
  r.budget = eps + 10.0 * eps * eps;
  r.details["perturbation"] = pp.perturbation;
  r.details["perturbation_budget"] = pp.budget;
  r.pass = r.max_residual <= r.budget;
  return r;
}

/// Eigenbasis U1 with ratios l_i = lambda2_i / lambda1_i in [1/c, c] separated
/// by at least gamma_min; U2 is the orthonormal polar factor of U1 + eps A.
struct PerturbationSpec {
  CommonSpectrumSpec base;  // Psi = U1, lambda1, lambda2
  Matrix A;                 // unit operator norm
  double c = 2.0;
  Vector gamma;             // per-index gap of the ratios
};

inline PerturbationSpec make_perturbation_spec(Index n, double c, double gamma_min,
                                               std::uint64_t seed) {
  if (!(c > 1.0)) throw ValidationError("perturbation spec: c must exceed 1");
  const double room = (c - 1.0 / c) - static_cast<double>(n - 1) * gamma_min;
  if (!(gamma_min > 0.0) || room < 0.0) {
    throw ValidationError("perturbation spec: cannot fit " + std::to_string(n) +
                          " ratios in [1/c, c] with gap " + detail::num(gamma_min));
  }
  Rng rng(seed);
  PerturbationSpec ps;
  ps.c = c;
  ps.base.Psi = random_orthonormal(n, rng);
  std::vector<double> offsets(static_cast<std::size_t>(n));
  for (auto& o : offsets) o = rng.uniform() * room;
  std::sort(offsets.begin(), offsets.end());
  std::vector<double> ratio(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    ratio[static_cast<std::size_t>(i)] =
        1.0 / c + offsets[static_cast<std::size_t>(i)] + static_cast<double>(i) * gamma_min;
  }
  // Shuffle which eigenvector gets which ratio.
  for (Index i = n - 1; i > 0; --i) {
    std::swap(ratio[static_cast<std::size_t>(i)],
              ratio[rng.below(static_cast<std::uint64_t>(i + 1))]);
  }
  ps.base.lambda1.resize(n);
  ps.base.lambda2.resize(n);
  for (Index i = 0; i < n; ++i) {
    ps.base.lambda1[i] = rng.log_uniform(1e-2, 1.0 / c);
    ps.base.lambda2[i] = ps.base.lambda1[i] * ratio[static_cast<std::size_t>(i)];
  }
  ps.gamma.resize(n);
  for (Index i = 0; i < n; ++i) {
    double g = INFINITY;
    for (Index k = 0; k < n; ++k) {
      if (k != i) g = std::min(g, std::abs(ratio[static_cast<std::size_t>(i)] -
                                           ratio[static_cast<std::size_t>(k)]));
    }
    ps.gamma[i] = g;
  }
  const Matrix a = rng.gaussian(n, n);
  ps.A = a / Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
  return ps;
}

/// Orthonormal polar factor of m.
inline Matrix polar_orthonormal(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// ||(F - 0.5 sqrt(l1 l2) log(l1 / l2) I) psi_j|| for U2 = polar(U1 + eps A).
inline double pseudo_F_residual(const PerturbationSpec& ps, Index j, double eps) {
  const Matrix& u1 = ps.base.Psi;
  const Matrix u2 = eps == 0.0 ? u1 : polar_orthonormal(u1 + eps * ps.A);
  const SpdMatrix w1 = spd_from(u1, ps.base.lambda1);
  const SpdMatrix w2 = spd_from(u2, ps.base.lambda2);
  const SymmetricMatrix f = compose_F(w1, w2);
  const double l1 = ps.base.lambda1[j];
  const double l2 = ps.base.lambda2[j];
  const double lam = 0.5 * std::sqrt(l1 * l2) * std::log(l1 / l2);
  return pseudo_residual(f, lam, u1.col(j));
}

/// Largest allowed spread of residual/eps across the sweep.
inline constexpr double kPseudoFSpreadLimit = 4.0;

/// O(eps) check over eps in {1e-2, 1e-3, 1e-4}: residual/eps must stay within
/// a factor of 4, and each tenfold step in eps must shrink the residual by a
/// factor in [0.05, 0.5].
inline Report check_pseudo_F(const PerturbationSpec& ps, Index j) {
  const std::vector<double> sweep{1e-2, 1e-3, 1e-4};
  std::vector<double> res;
  for (double e : sweep) res.push_back(pseudo_F_residual(ps, j, e));
  double lo = INFINITY;
  double hi = 0.0;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    lo = std::min(lo, res[k] / sweep[k]);
    hi = std::max(hi, res[k] / sweep[k]);
  }
  bool steps_ok = true;
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (std::size_t k = 1; k < sweep.size(); ++k) {
    const double step = res[k] / res[k - 1];
    steps.push_back(step);
    steps_ok = steps_ok && step >= 0.05 && step <= 0.5;
  }
  double denom = INFINITY;
  for (Index i = 0; i < ps.gamma.size(); ++i) {
    denom = std::min(denom, ps.gamma[i] * std::sqrt(ps.base.lambda1[i]));
  }
  Report r;
  r.oracle = "pseudo_F";
  r.instances = 1;
  r.max_residual = hi / lo;
  r.budget = kPseudoFSpreadLimit;
  r.details["residuals"] = res;
  r.details["step_ratios"] = steps;
  r.details["empirical_constant"] = hi;
  r.details["implied_constant_scale"] = std::sqrt(ps.c) * std::log(ps.c) / denom;
  r.pass = (hi / lo) < kPseudoFSpreadLimit && steps_ok;
  return r;
}

/// S = (W2 W1^{-1})^{1/2} W1 and F = log(W1 S^{-1}) S, evaluated with general
/// Schur-based matrix functions in extended precision. In double precision the
/// non-normal product W2 W1^{-1} loses up to ~1e-7 relative accuracy at
/// condition 1e6, which would swamp the quantity being measured.
struct EquivalentForms {
  double s_discrepancy = 0.0;
  double f_discrepancy = 0.0;
};

inline EquivalentForms equivalent_forms(const SpdMatrix& w1, const SpdMatrix& w2) {
  using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const SpdMatrix s = compose_S(w1, w2);
  const SymmetricMatrix f = compose_F_at(s, w1);
  const MatrixL a = w1.matrix().cast<long double>();
  const MatrixL b = w2.matrix().cast<long double>();
  const MatrixL ratio = b * a.inverse();
  const MatrixL s_alt = MatrixL(ratio.sqrt()) * a;
  const MatrixL f_alt = MatrixL(MatrixL(a * s_alt.inverse()).log()) * s_alt;
  auto rel = [](const Matrix& got, const MatrixL& want, long double denom) {
    const long double diff = (got.cast<long double>() - want).norm();
    return static_cast<double>(denom > 0 ? diff / denom : diff);
  };
  // F vanishes when W1 == W2; a reference at round-off level relative to S
  // has no meaningful scale of its own, so S sets it.
  const long double s_scale = s_alt.norm();
  const long double f_scale = f_alt.norm() > 1e-12L * s_scale ? f_alt.norm() : s_scale;
  return {rel(s.matrix(), s_alt, s_scale), rel(f.matrix(), f_alt, f_scale)};
}

inline constexpr double kEquivalentFormsTol = 1e-9;

inline Report check_equivalent_forms(const SpdMatrix& w1, const SpdMatrix& w2) {
  const EquivalentForms e = equivalent_forms(w1, w2);
  Report r;
  r.oracle = "equivalent_forms";
  r.instances = 1;
  r.max_residual = std::max(e.s_discrepancy, e.f_discrepancy);
  r.budget = kEquivalentFormsTol;
  r.details["S"] = e.s_discrepancy;
  r.details["F"] = e.f_discrepancy;
  r.pass = r.max_residual <= kEquivalentFormsTol;
  return r;
}

/// Random SPD pair with eigenvalues log-uniform in [1/max_cond, 1].
inline std::pair<SpdMatrix, SpdMatrix> random_spd_pair(Index n, double max_cond,
                                                       std::uint64_t seed) {
  Rng rng(seed);
  const Matrix q1 = random_orthonormal(n, rng);
  const Matrix q2 = random_orthonormal(n, rng);
  Vector l1(n);
  Vector l2(n);
  for (Index i = 0; i < n; ++i) l1[i] = rng.log_uniform(1.0 / max_cond, 1.0);
  for (Index i = 0; i < n; ++i) l2[i] = rng.log_uniform(1.0 / max_cond, 1.0);
  return {spd_from(q1, l1), spd_from(q2, l2)};
}

inline constexpr double kReconstructionTol = 1e-8;

inline Report check_reconstruction(const SpdMatrix& w1, const SpdMatrix& w2) {
  const CompositePair pair = compose(w1.symmetric(), w2.symmetric(), GeodesicParam::midpoint(),
                                     Routing::ForceSpd);
  const auto [r1, r2] = reconstruct(pair);
  Report r;
  r.oracle = "reconstruction";
  r.instances = 1;
  const double e1 = relative_frobenius(r1.matrix(), w1.matrix());
  const double e2 = relative_frobenius(r2.matrix(), w2.matrix());
  r.max_residual = std::max(e1, e2);
  r.budget = kReconstructionTol;
  r.details["W1"] = e1;
  r.details["W2"] = e2;
  r.pass = r.max_residual <= kReconstructionTol;
  return r;
}

inline constexpr double kToyTol = 1e-9;
inline constexpr double kToySpsdTol = 1e-8;
inline constexpr double kToyNullTol = 1e-10;
inline constexpr double kToyAngleTol = 1e-7;

/// Toy pair: S and F spectra against the closed-form values on Psi. On the
/// rank-3 pair the psi_4 direction must be annihilated by both operators.
inline Report check_toy(bool spsd) {
  const ToyPair toy = spsd ? toy_spsd_pair() : toy_spd_pair();
  const ToyPair ref = toy_spd_pair();
  const CompositePair pair = compose(toy.M1, toy.M2);
  Vector s_expected = (ref.lambda1.array() * ref.lambda2.array()).sqrt();
  const Vector f_expected = common_F_values(ref.lambda1, ref.lambda2);
  if (spsd) s_expected[3] = 0.0;
  const SymmetricMatrix s = pair.S_dense();
  const EigenSystem es = sym_eig(s);
  const EigenSystem ef = sym_eig(pair.F);
  const SpectrumMatch ms = match_spectrum(es, s_expected, toy.Psi);
  const SpectrumMatch mf = match_spectrum(ef, f_expected, toy.Psi);
  const double tol = spsd ? kToySpsdTol : kToyTol;
  Report r;
  r.oracle = spsd ? "toy_spsd" : "toy_spd";
  r.instances = 1;
  r.max_residual = std::max(ms.value_residual, mf.value_residual);
  r.budget = tol;
  r.details["path"] = pair.on_spsd_path() ? "spsd" : "spd";
  r.details["S_eigenvalues"] = std::vector<double>(es.values.begin(), es.values.end());
  r.details["F_eigenvalues"] = std::vector<double>(ef.values.begin(), ef.values.end());
  r.details["S_max_angle"] = ms.angle_residual;
  r.details["F_max_angle"] = mf.angle_residual;
  r.pass = r.max_residual <= tol && ms.angle_residual <= kToyAngleTol &&
           mf.angle_residual <= kToyAngleTol && pair.on_spsd_path() == spsd;
  if (spsd) {
    const Vector psi4 = toy.Psi.col(3);
    const double null_s = (s.matrix() * psi4).norm();
    const double null_f = (pair.F.matrix() * psi4).norm();
    r.details["S_psi4"] = null_s;
    r.details["F_psi4"] = null_f;
    r.pass = r.pass && null_s < kToyNullTol && null_f < kToyNullTol;
  }
  return r;
}

struct SuiteConfig {
  Index seeds = 100;
  Index n = 20;
  std::uint64_t seed = 0;
};

inline std::vector<std::string> suite_names() {
  return {"theorems", "toy", "forms", "pseudo"};
}

/// Runs one named suite and returns one folded report per oracle.
inline std::vector<Report> run_suite(const std::string& name, const SuiteConfig& cfg) {
  if (cfg.seeds < 1 || cfg.n < 2) throw ValidationError("verify: need seeds >= 1 and n >= 2");
  std::vector<Report> out;
  auto fold = [](std::vector<Report>& acc, const Report& r) {
    for (auto& a : acc) {
      if (a.oracle == r.oracle) {
        a.absorb(r);
        return;
      }
    }
    acc.push_back(r);
    acc.back().details = nlohmann::ordered_json::object();
  };
  if (name == "theorems") {
    for (Index s = 0; s < cfg.seeds; ++s) {
      const CommonSpectrumSpec spec = random_common_spec(cfg.n, cfg.seed + static_cast<std::uint64_t>(s));
      const auto [w1, w2] = make_common_pair(spec);
      fold(out, check_common_S(w1, w2, spec.Psi, spec.lambda1, spec.lambda2));
      fold(out, check_common_F(w1, w2, spec.Psi, spec.lambda1, spec.lambda2));
    }
  } else if (name == "toy") {
    out.push_back(check_toy(false));
    out.push_back(check_toy(true));
  } else if (name == "forms") {
    for (Index s = 0; s < cfg.seeds; ++s) {
      const auto [w1, w2] = random_spd_pair(cfg.n, 1e6, cfg.seed + static_cast<std::uint64_t>(s));
      fold(out, check_equivalent_forms(w1, w2));
      fold(out, check_reconstruction(w1, w2));
    }
  } else if (name == "pseudo") {
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      for (Index s = 0; s < cfg.seeds; ++s) {
        const auto seed = cfg.seed + static_cast<std::uint64_t>(s);
        const CommonSpectrumSpec spec = random_common_spec(cfg.n, seed);
        fold(out, check_pseudo_S(spec, s % cfg.n, eps, seed));
      }
    }
    // Ten ratios with gap 0.1 fit comfortably in [1/2, 2].
    const Index n4 = std::min<Index>(cfg.n, 10);
    for (Index s = 0; s < cfg.seeds; ++s) {
      const auto seed = cfg.seed + static_cast<std::uint64_t>(s);
      fold(out, check_pseudo_F(make_perturbation_spec(n4, 2.0, 0.1, seed), s % n4));
    }
  } else {
    throw ValidationError("unknown suite '" + name + "' (theorems, toy, forms, pseudo or all)");
  }
  return out;
}

}  // namespace rmra
