#pragma once

// Composite operators for a pair of kernels: S = W1 #_p W2 (common
// components expressed alike) and F = Log_S(W1) (common components expressed
// differently), their spectral embeddings, and the kernel-product baselines.

#include <Eigen/SVD>

#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "rmra/linalg.hpp"
#include "rmra/spd.hpp"
#include "rmra/spsd.hpp"

namespace rmra {

inline SpdMatrix compose_S(const SpdMatrix& w1, const SpdMatrix& w2, GeodesicParam p = {}) {
  return geodesic(w1, w2, p);
}

/// F = Log_S(W1) for an already computed S.
inline SymmetricMatrix compose_F_at(const SpdMatrix& s, const SpdMatrix& w1) {
  return log_map(s, w1);
}

inline SymmetricMatrix compose_F(const SpdMatrix& w1, const SpdMatrix& w2, GeodesicParam p = {}) {
  return compose_F_at(compose_S(w1, w2, p), w1);
}

enum class Routing { Auto, ForceSpd, ForceSpsd };

inline const char* to_string(Routing r) {
  switch (r) {
    case Routing::Auto: return "auto";
    case Routing::ForceSpd: return "spd";
    case Routing::ForceSpsd: return "spsd";
  }
  return "?";
}

inline Routing parse_routing(const std::string& s) {
  if (s == "auto") return Routing::Auto;
  if (s == "spd") return Routing::ForceSpd;
  if (s == "spsd") return Routing::ForceSpsd;
  throw ValidationError("unknown routing '" + s + "' (expected auto, spd or spsd)");
}

/// Operators whose smallest eigenvalue is at most this fraction of the largest
/// go through the fixed-rank path under Routing::Auto.
inline constexpr double kSpsdRouteThreshold = 1e-10;

inline bool needs_spsd(const EigenSystem& es) {
  const double top = es.values[0];
  return !(top > 0.0) || es.values[es.dim() - 1] <= kSpsdRouteThreshold * top;
}

inline bool needs_spsd(const SymmetricMatrix& w) { return needs_spsd(sym_eig(w)); }

using CompositeS = std::variant<SpdMatrix, SpsdFactors>;

inline SymmetricMatrix dense(const CompositeS& s) {
  return std::visit(
      [](const auto& m) -> SymmetricMatrix {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SpdMatrix>) {
          return m.symmetric();
        } else {
          return m.dense();
        }
      },
      s);
}

struct Provenance {
  std::string first;
  std::string second;
  bool spsd = false;
  Index rank = 0;  // retained rank on the fixed-rank path
};

struct CompositePair {
  CompositeS S;
  SymmetricMatrix F;
  GeodesicParam p;
  Provenance provenance;

  bool on_spsd_path() const { return provenance.spsd; }
  SymmetricMatrix S_dense() const { return dense(S); }
};

/// Algorithm entry point for one pair: routes to the SPD or fixed-rank path.
inline CompositePair compose(const SymmetricMatrix& w1, const SymmetricMatrix& w2,
                             GeodesicParam p = {}, Routing routing = Routing::Auto,
                             std::string first = "W1", std::string second = "W2",
                             RankPolicy rank = RankPolicy::relative()) {
  detail::require_same_dim(w1.dim(), w2.dim(), "compose");
  const EigenSystem e1 = sym_eig(w1);
  const EigenSystem e2 = sym_eig(w2);
  const bool spsd = routing == Routing::ForceSpsd ||
                    (routing == Routing::Auto && (needs_spsd(e1) || needs_spsd(e2)));
  Provenance prov{std::move(first), std::move(second), spsd, w1.dim()};
  if (!spsd) {
    const SpdMatrix a = SpdMatrix::from_eigensystem(w1, e1);
    const SpdMatrix b = SpdMatrix::from_eigensystem(w2, e2);
    SpdMatrix s = compose_S(a, b, p);
    SymmetricMatrix f = compose_F_at(s, a);
    return {std::move(s), std::move(f), p, std::move(prov)};
  }
  auto [a, b] = match_rank(spsd_factorize(e1, rank), spsd_factorize(e2, rank));
  SpsdFactors s = spsd_geodesic(a, b, p);
  SymmetricMatrix f = spsd_compose_F(s, a);
  prov.rank = s.rank();
  return {std::move(s), std::move(f), p, std::move(prov)};
}

/// Exp_S(F) and Exp_S(-F); the second equals W2 only at the midpoint.
inline std::pair<SpdMatrix, SpdMatrix> reconstruct(const CompositePair& pair) {
  if (pair.on_spsd_path()) {
    throw ValidationError("reconstruct: only available on the SPD path");
  }
  if (pair.p.value() != 0.5) {
    throw ValidationError("reconstruct: needs p = 0.5, got " + detail::num(pair.p.value()));
  }
  const auto& s = std::get<SpdMatrix>(pair.S);
  return {exp_map(s, pair.F), exp_map(s, -pair.F)};
}

enum class SelectionKind { TopByValue, TopByAbsValue, Signed };

/// Which eigenpairs an embedding keeps. Signed(k) keeps the k largest and the
/// k most negative eigenvalues, in that order.
struct Selection {
  SelectionKind kind = SelectionKind::TopByValue;
  Index k = 0;

  static Selection top_by_value() { return {SelectionKind::TopByValue, 0}; }
  static Selection top_by_abs_value() { return {SelectionKind::TopByAbsValue, 0}; }
  static Selection signed_pairs(Index k) { return {SelectionKind::Signed, k}; }
};

inline std::string to_string(const Selection& s) {
  switch (s.kind) {
    case SelectionKind::TopByValue: return "value";
    case SelectionKind::TopByAbsValue: return "abs";
    case SelectionKind::Signed: return "signed";
  }
  return "?";
}

struct Embedding {
  Matrix vectors;  // N x M
  Vector values;
  Selection selection;
  std::vector<Index> source;  // rank of each column in the full ordering
};

inline Embedding embed(const EigenSystem& es, Index m, Selection sel) {
  const Index n = es.dim();
  if (sel.kind == SelectionKind::Signed) {
    if (sel.k < 1 || 2 * sel.k > n) {
      throw ValidationError("embed: signed selection needs 1 <= k <= N/2 (k=" +
                            std::to_string(sel.k) + ", N=" + std::to_string(n) + ")");
    }
    if (es.ordering != Ordering::ByValueDesc) {
      throw ValidationError("embed: signed selection needs a value-ordered decomposition");
    }
    m = 2 * sel.k;
  } else if (m < 1 || m > n) {
    throw ValidationError("embed: M must lie in [1, N] (M=" + std::to_string(m) +
                          ", N=" + std::to_string(n) + ")");
  }
  const Ordering want =
      sel.kind == SelectionKind::TopByAbsValue ? Ordering::ByAbsValueDesc : Ordering::ByValueDesc;
  if (es.ordering != want) throw ValidationError("embed: decomposition has the wrong ordering");
  Embedding out;
  out.selection = sel;
  out.vectors.resize(n, m);
  out.values.resize(m);
  for (Index c = 0; c < m; ++c) {
    const Index src = (sel.kind == SelectionKind::Signed && c >= sel.k) ? n - 1 - (c - sel.k) : c;
    out.vectors.col(c) = es.vectors.col(src);
    out.values[c] = es.values[src];
    out.source.push_back(src);
  }
  return out;
}

inline Embedding embed(const SymmetricMatrix& op, Index m, Selection sel) {
  const Ordering ordering =
      sel.kind == SelectionKind::TopByAbsValue ? Ordering::ByAbsValueDesc : Ordering::ByValueDesc;
  return embed(sym_eig(op, ordering), m, sel);
}

// Kernel-product baselines.

/// L^T L with L = W1 W2.
inline SymmetricMatrix baseline_dynamic_laplacian(const SymmetricMatrix& w1,
                                                  const SymmetricMatrix& w2) {
  detail::require_same_dim(w1.dim(), w2.dim(), "baseline_dynamic_laplacian");
  const Matrix l = w1.matrix() * w2.matrix();
  return SymmetricMatrix(Matrix(l.transpose() * l));
}

/// W1 W2^T + W2 W1^T.
inline SymmetricMatrix baseline_hat_S(const SymmetricMatrix& w1, const SymmetricMatrix& w2) {
  detail::require_same_dim(w1.dim(), w2.dim(), "baseline_hat_S");
  const Matrix p = w1.matrix() * w2.matrix().transpose();
  return SymmetricMatrix(Matrix(p + p.transpose()));
}

/// W1 W2^T - W2 W1^T (antisymmetric).
inline Matrix baseline_hat_A(const SymmetricMatrix& w1, const SymmetricMatrix& w2) {
  detail::require_same_dim(w1.dim(), w2.dim(), "baseline_hat_A");
  const Matrix p = w1.matrix() * w2.matrix().transpose();
  return p - p.transpose();
}

/// Leading left singular vectors, for the antisymmetric baseline.
inline Embedding svd_embed(const Matrix& a, Index m) {
  if (m < 1 || m > a.rows()) throw ValidationError("svd_embed: M out of range");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullU);
  Embedding out;
  out.selection = Selection::top_by_value();
  Matrix u = svd.matrixU().leftCols(m);
  detail::fix_signs(u);
  out.vectors = std::move(u);
  out.values = svd.singularValues().head(m);
  for (Index c = 0; c < m; ++c) out.source.push_back(c);
  return out;
}

}  // namespace rmra
