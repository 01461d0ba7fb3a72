#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rmra/composite.hpp"
#include "rmra/datagen.hpp"
#include "rmra/random.hpp"
#include "rmra/spsd.hpp"

using namespace rmra;

namespace {

// Closed-form toy values, evaluated independently to full precision.
constexpr double kToyS1 = 1.0;
constexpr double kToyS2 = 0.2;
constexpr double kToyS3 = 0.07071067811865475;   // sqrt(0.5 * 0.01)
constexpr double kToyF = 0.138310899764801;      // 0.5 sqrt(0.005) ln(50)

Matrix basis(Index n, std::initializer_list<Index> cols) {
  Matrix v = Matrix::Zero(n, static_cast<Index>(cols.size()));
  Index c = 0;
  for (Index k : cols) v(k, c++) = 1.0;
  return v;
}

SpsdFactors random_factors(Index n, Index r, std::uint64_t seed, double lo = 1e-2) {
  Rng rng(seed);
  const Matrix v = random_orthonormal(n, r, rng);
  Vector l(r);
  for (Index i = 0; i < r; ++i) l[i] = rng.log_uniform(lo, 1.0);
  return SpsdFactors(v, l);
}

SpdMatrix random_spd(Index n, double max_cond, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix q = random_orthonormal(n, rng);
  Vector l(n);
  for (Index i = 0; i < n; ++i) l[i] = rng.log_uniform(1.0 / max_cond, 1.0);
  return SpdMatrix(congruence(q, SymmetricMatrix::diagonal(l)));
}

// Largest |<v, psi>| over the columns selected, i.e. alignment up to sign.
double alignment(const Vector& v, const Vector& psi) { return std::abs(v.dot(psi)); }

}  // namespace

// spsd-geometry -----------------------------------------------------------

TEST(SpsdFactorize, RankOneOuterProduct) {
  Vector v(3);
  v << 2.0, -1.0, 2.0;
  v /= 3.0;
  const SpsdFactors f = spsd_factorize(SymmetricMatrix(Matrix(v * v.transpose())));
  ASSERT_EQ(f.rank(), 1);
  EXPECT_NEAR(f.Lambda().matrix()(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(alignment(f.V().col(0), v), 1.0, 1e-15);
}

TEST(SpsdFactorize, DiagonalFixedRank) {
  const SpsdFactors f =
      spsd_factorize(SymmetricMatrix::diagonal(Vector{{2.0, 1.0, 0.0}}), RankPolicy::fixed(2));
  EXPECT_EQ(f.V(), basis(3, {0, 1}));
  EXPECT_EQ(f.Lambda().matrix(), Matrix(Vector{{2.0, 1.0}}.asDiagonal()));
}

TEST(SpsdFactorize, ToyMatrixHasRankThree) {
  const ToyPair toy = toy_spsd_pair();
  const SpsdFactors f = spsd_factorize(toy.M1);
  EXPECT_EQ(f.rank(), 3);
  EXPECT_LE((f.dense().matrix() - toy.M1.matrix()).norm(), 1e-10);
  EXPECT_LE((f.V().transpose() * f.V() - Matrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(SpsdFactorize, Contracts) {
  EXPECT_THROW(spsd_factorize(SymmetricMatrix::diagonal(Vector{{1.0, -1e-6}})), ValidationError);
  EXPECT_NO_THROW(spsd_factorize(SymmetricMatrix::diagonal(Vector{{1.0, -1e-12}})));
  EXPECT_THROW(spsd_factorize(SymmetricMatrix::diagonal(Vector{{1.0, 0.0}}), RankPolicy::fixed(2)),
               ValidationError);
  EXPECT_THROW(spsd_factorize(SymmetricMatrix::zero(3)), ValidationError);
  EXPECT_THROW(SpsdFactors(Matrix::Ones(3, 1), Vector{{1.0}}), ValidationError);
}

TEST(PrincipalAngles, IdenticalSubspaces) {
  const Matrix v = random_factors(6, 3, 1).V();
  const PrincipalAngles pa = principal_angles(v, v);
  EXPECT_LE((pa.sigma - Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(pa.theta.maxCoeff(), 1e-7);
  EXPECT_LE((pa.O1.transpose() * pa.O1 - Matrix::Identity(3, 3)).norm(), 1e-10);
  EXPECT_LE((pa.O2.transpose() * pa.O2 - Matrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(PrincipalAngles, OrthogonalSubspaces) {
  const PrincipalAngles pa = principal_angles(basis(4, {0, 1}), basis(4, {2, 3}));
  EXPECT_EQ(pa.sigma, Vector::Zero(2));
  EXPECT_NEAR(pa.theta[0], std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(pa.theta[1], std::numbers::pi / 2, 1e-15);
}

TEST(PrincipalAngles, QuarterTurn) {
  Matrix v2 = Matrix::Zero(3, 2);
  v2(0, 0) = 1.0;
  v2(1, 1) = v2(2, 1) = 1.0 / std::sqrt(2.0);
  const PrincipalAngles pa = principal_angles(basis(3, {0, 1}), v2);
  EXPECT_NEAR(pa.theta[0], 0.0, 1e-7);
  EXPECT_NEAR(pa.theta[1], std::numbers::pi / 4, 1e-15);
  EXPECT_THROW(principal_angles(Matrix::Ones(3, 2), v2), ValidationError);
}

TEST(GrassmannGeodesic, StartAndFixedPoint) {
  const Matrix v1 = random_factors(8, 3, 2).V();
  const Matrix v2 = random_factors(8, 3, 3).V();
  const PrincipalAngles pa = principal_angles(v1, v2);
  EXPECT_LE((grassmann_geodesic(pa, v1, v2, GeodesicParam(0.0)) - v1 * pa.O1).norm(), 1e-12);
  const PrincipalAngles same = principal_angles(v1, v1);
  for (double p : {0.3, 1.0}) {
    EXPECT_LE(projector_distance(grassmann_geodesic(same, v1, v1, GeodesicParam(p)), v1), 1e-12);
  }
}

TEST(GrassmannGeodesic, FarEndpointSpansSecondRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix v1 = random_factors(12, 4, 10 + seed).V();
    const Matrix v2 = random_factors(12, 4, 50 + seed).V();
    const PrincipalAngles pa = principal_angles(v1, v2);
    const Matrix u = grassmann_geodesic(pa, v1, v2, GeodesicParam(1.0));
    EXPECT_LE(projector_distance(u, v2), 1e-8);
    EXPECT_LE((u.transpose() * u - Matrix::Identity(4, 4)).norm(), 1e-12);
  }
}

TEST(SpsdGeodesic, Endpoints) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SpsdFactors a = random_factors(10, 4, 100 + seed);
    const SpsdFactors b = random_factors(10, 4, 200 + seed);
    const Matrix w1 = a.dense().matrix();
    const Matrix w2 = b.dense().matrix();
    EXPECT_LE(relative_frobenius(spsd_geodesic(a, b, GeodesicParam(0.0)).dense().matrix(), w1),
              1e-8);
    EXPECT_LE(relative_frobenius(spsd_geodesic(a, b, GeodesicParam(1.0)).dense().matrix(), w2),
              1e-8);
  }
}

TEST(SpsdGeodesic, SameInputIsFixed) {
  const SpsdFactors a = random_factors(9, 3, 7);
  for (double p : {0.0, 0.4, 1.0}) {
    EXPECT_LE(relative_frobenius(spsd_geodesic(a, a, GeodesicParam(p)).dense().matrix(),
                                 a.dense().matrix()),
              1e-12);
  }
  EXPECT_LE(spsd_compose_F(a, a).matrix().norm(), 1e-12);
}

TEST(SpsdGeodesic, FullRankAgreesWithSpdPath) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 3 + static_cast<Index>(seed);
    const SpdMatrix a = random_spd(n, 1e3, 300 + seed);
    const SpdMatrix b = random_spd(n, 1e3, 400 + seed);
    const SpsdFactors fa = spsd_factorize(a.symmetric());
    const SpsdFactors fb = spsd_factorize(b.symmetric());
    ASSERT_EQ(fa.rank(), n);
    const SpsdFactors s = spsd_compose_S(fa, fb);
    const SpdMatrix s_ref = compose_S(a, b);
    EXPECT_LE(relative_frobenius(s.dense().matrix(), s_ref.matrix()), 1e-8);
    EXPECT_LE(relative_frobenius(spsd_compose_F(s, fa).matrix(), compose_F_at(s_ref, a).matrix()),
              1e-8);
  }
}

TEST(SpsdGeodesic, CoreStaysPositive) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SpsdFactors s =
        spsd_compose_S(random_factors(15, 5, 500 + seed, 1e-6), random_factors(15, 5, 600 + seed, 1e-6));
    EXPECT_GT(s.Lambda().lambda_min(), 0.0);
  }
}

TEST(SpsdComposeS, CommutingRankTwo) {
  const SpsdFactors a = spsd_factorize(SymmetricMatrix::diagonal(Vector{{1.0, 4.0, 0.0}}));
  const SpsdFactors b = spsd_factorize(SymmetricMatrix::diagonal(Vector{{4.0, 1.0, 0.0}}));
  const Matrix s = spsd_compose_S(a, b).dense().matrix();
  EXPECT_LE((s - Matrix(Vector{{2.0, 2.0, 0.0}}.asDiagonal())).norm(), 1e-14);
}

TEST(SpsdCompose, ToySpectra) {
  const ToyPair toy = toy_spsd_pair();
  const auto [a, b] = match_rank(spsd_factorize(toy.M1), spsd_factorize(toy.M2));
  const SpsdFactors s = spsd_compose_S(a, b);
  const EigenSystem es = sym_eig(s.dense());
  EXPECT_NEAR(es.values[0], kToyS1, 1e-12);
  EXPECT_NEAR(es.values[1], kToyS3, 1e-12);
  EXPECT_NEAR(es.values[2], kToyS3, 1e-12);
  EXPECT_LT(std::abs(es.values[3]), 1e-12);
  const EigenSystem ef = sym_eig(spsd_compose_F(s, a));
  EXPECT_NEAR(ef.values[0], kToyF, 1e-12);
  EXPECT_NEAR(ef.values[3], -kToyF, 1e-12);
  EXPECT_LT(std::abs(ef.values[1]), 1e-12);
  EXPECT_LT(std::abs(ef.values[2]), 1e-12);
}

TEST(SpsdCompose, SwappingInputsFlipsF) {
  const ToyPair toy = toy_spsd_pair();
  const SpsdFactors a = spsd_factorize(toy.M1);
  const SpsdFactors b = spsd_factorize(toy.M2);
  const SymmetricMatrix f12 = spsd_compose_F(spsd_compose_S(a, b), a);
  const SymmetricMatrix f21 = spsd_compose_F(spsd_compose_S(b, a), b);
  EXPECT_LE((f12.matrix() + f21.matrix()).norm(), 1e-8);
}

TEST(MatchRank, TruncatesToSmaller) {
  const auto [a, b] = match_rank(random_factors(8, 5, 1), random_factors(8, 3, 2));
  EXPECT_EQ(a.rank(), 3);
  EXPECT_EQ(b.rank(), 3);
  EXPECT_THROW(spsd_geodesic(random_factors(8, 5, 1), random_factors(8, 3, 2), {}),
               ValidationError);
}

// composite ---------------------------------------------------------------

TEST(ComposeS, SamePointAndToy) {
  const SpdMatrix w = random_spd(7, 100, 1);
  EXPECT_LE(relative_frobenius(compose_S(w, w).matrix(), w.matrix()), 1e-12);

  const ToyPair toy = toy_spd_pair();
  const SpdMatrix s = compose_S(SpdMatrix(toy.M1), SpdMatrix(toy.M2));
  const EigenSystem& es = s.eigen();
  EXPECT_NEAR(es.values[0], kToyS1, 1e-12);
  EXPECT_NEAR(es.values[1], kToyS2, 1e-12);
  EXPECT_NEAR(es.values[2], kToyS3, 1e-12);
  EXPECT_NEAR(es.values[3], kToyS3, 1e-12);
  // 1 on psi_2, 0.2 on psi_4, the degenerate pair spans {psi_1, psi_3}.
  EXPECT_NEAR(alignment(es.vectors.col(0), toy.Psi.col(1)), 1.0, 1e-12);
  EXPECT_NEAR(alignment(es.vectors.col(1), toy.Psi.col(3)), 1.0, 1e-12);
  Matrix pair(4, 2);
  pair << toy.Psi.col(0), toy.Psi.col(2);
  EXPECT_LE(projector_distance(es.vectors.rightCols(2), pair), 1e-10);
}

TEST(ComposeF, SamePointToyAndSwap) {
  const SpdMatrix w = random_spd(7, 100, 2);
  EXPECT_LE(compose_F(w, w).matrix().norm(), 1e-12);

  const ToyPair toy = toy_spd_pair();
  const SpdMatrix m1(toy.M1);
  const SpdMatrix m2(toy.M2);
  const SymmetricMatrix f = compose_F(m1, m2);
  const EigenSystem ef = sym_eig(f);
  EXPECT_NEAR(ef.values[0], kToyF, 1e-12);
  EXPECT_NEAR(ef.values[3], -kToyF, 1e-12);
  EXPECT_NEAR(alignment(ef.vectors.col(0), toy.Psi.col(0)), 1.0, 1e-12);
  EXPECT_NEAR(alignment(ef.vectors.col(3), toy.Psi.col(2)), 1.0, 1e-12);
  Matrix null(4, 2);
  null << toy.Psi.col(1), toy.Psi.col(3);
  EXPECT_LE(projector_distance(ef.vectors.middleCols(1, 2), null), 1e-10);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SpdMatrix a = random_spd(10, 1e3, 10 + seed);
    const SpdMatrix b = random_spd(10, 1e3, 20 + seed);
    const Matrix fab = compose_F(a, b).matrix();
    EXPECT_LE((fab + compose_F(b, a).matrix()).norm(), 1e-9 * fab.norm());
  }
}

TEST(ComposeF, PositiveWhereFirstDominates) {
  Rng rng(5);
  const Matrix psi = random_orthonormal(6, rng);
  const Vector l1{{0.9, 0.1, 0.5, 0.3, 0.02, 0.7}};
  const Vector l2{{0.2, 0.6, 0.5, 0.9, 0.01, 0.1}};
  const SymmetricMatrix f = compose_F(SpdMatrix(congruence(psi, SymmetricMatrix::diagonal(l1))),
                                      SpdMatrix(congruence(psi, SymmetricMatrix::diagonal(l2))));
  for (Index i = 0; i < 6; ++i) {
    const double rq = psi.col(i).dot(f.matrix() * psi.col(i));
    if (l1[i] > l2[i]) EXPECT_GT(rq, 0.0) << i;
    if (l1[i] < l2[i]) EXPECT_LT(rq, 0.0) << i;
  }
}

TEST(Compose, RoutingAndProvenance) {
  const ToyPair spd = toy_spd_pair();
  const ToyPair spsd = toy_spsd_pair();
  const CompositePair a = compose(spd.M1, spd.M2, {}, Routing::Auto, "first", "second");
  EXPECT_FALSE(a.on_spsd_path());
  EXPECT_EQ(a.provenance.first, "first");
  EXPECT_EQ(a.provenance.second, "second");
  const CompositePair b = compose(spsd.M1, spsd.M2);
  EXPECT_TRUE(b.on_spsd_path());
  EXPECT_EQ(b.provenance.rank, 3);
  EXPECT_THROW(compose(spsd.M1, spsd.M2, {}, Routing::ForceSpd), ValidationError);
  const CompositePair c = compose(spd.M1, spd.M2, {}, Routing::ForceSpsd);
  EXPECT_TRUE(c.on_spsd_path());
  EXPECT_LE(relative_frobenius(c.S_dense().matrix(), a.S_dense().matrix()), 1e-8);
  EXPECT_EQ(parse_routing("spsd"), Routing::ForceSpsd);
  EXPECT_THROW(parse_routing("both"), ValidationError);
}

TEST(Embed, DiagonalAllColumns) {
  const Embedding e =
      embed(SymmetricMatrix::diagonal(Vector{{3.0, 1.0, 2.0}}), 3, Selection::top_by_value());
  EXPECT_EQ(e.values, (Vector{{3.0, 2.0, 1.0}}));
  EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(Embed, SignedToyF) {
  const ToyPair toy = toy_spd_pair();
  const SymmetricMatrix f = compose_F(SpdMatrix(toy.M1), SpdMatrix(toy.M2));
  const Embedding e = embed(f, 0, Selection::signed_pairs(1));
  ASSERT_EQ(e.values.size(), 2);
  EXPECT_NEAR(e.values[0], kToyF, 1e-12);
  EXPECT_NEAR(e.values[1], -kToyF, 1e-12);
  EXPECT_NEAR(alignment(e.vectors.col(0), toy.Psi.col(0)), 1.0, 1e-12);
  EXPECT_NEAR(alignment(e.vectors.col(1), toy.Psi.col(2)), 1.0, 1e-12);
  const Embedding abs = embed(f, 2, Selection::top_by_abs_value());
  EXPECT_NEAR(std::abs(abs.values[0]), kToyF, 1e-12);
  EXPECT_NEAR(std::abs(abs.values[1]), kToyF, 1e-12);
}

TEST(Embed, Contracts) {
  const SymmetricMatrix m = SymmetricMatrix::identity(4);
  EXPECT_THROW(embed(m, 0, Selection::top_by_value()), ValidationError);
  EXPECT_THROW(embed(m, 5, Selection::top_by_value()), ValidationError);
  EXPECT_THROW(embed(m, 0, Selection::signed_pairs(3)), ValidationError);
  EXPECT_THROW(embed(sym_eig(m, Ordering::ByAbsValueDesc), 2, Selection::top_by_value()),
               ValidationError);
}

TEST(Reconstruct, ToyAndRandom) {
  const ToyPair toy = toy_spd_pair();
  const CompositePair pair = compose(toy.M1, toy.M2);
  const auto [r1, r2] = reconstruct(pair);
  EXPECT_LE(relative_frobenius(r1.matrix(), toy.M1.matrix()), 1e-10);
  EXPECT_LE(relative_frobenius(r2.matrix(), toy.M2.matrix()), 1e-10);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 2 + static_cast<Index>(seed * 3);
    const SpdMatrix a = random_spd(n, 1e4, 30 + seed);
    const SpdMatrix b = random_spd(n, 1e4, 40 + seed);
    const auto [x, y] = reconstruct(compose(a.symmetric(), b.symmetric()));
    EXPECT_LE(relative_frobenius(x.matrix(), a.matrix()), 1e-8);
    EXPECT_LE(relative_frobenius(y.matrix(), b.matrix()), 1e-8);
  }
}

TEST(Reconstruct, EqualInputsAndContracts) {
  const SpdMatrix w = random_spd(5, 10, 3);
  const CompositePair pair = compose(w.symmetric(), w.symmetric());
  const auto [x, y] = reconstruct(pair);
  EXPECT_LE(relative_frobenius(x.matrix(), pair.S_dense().matrix()), 1e-12);
  EXPECT_LE(relative_frobenius(y.matrix(), pair.S_dense().matrix()), 1e-12);
  EXPECT_THROW(reconstruct(compose(w.symmetric(), w.symmetric(), GeodesicParam(0.3))),
               ValidationError);
  const ToyPair toy = toy_spsd_pair();
  EXPECT_THROW(reconstruct(compose(toy.M1, toy.M2)), ValidationError);
}

TEST(Baselines, ClosedForms) {
  const SymmetricMatrix id = SymmetricMatrix::identity(3);
  EXPECT_EQ(baseline_dynamic_laplacian(id, id).matrix(), Matrix::Identity(3, 3));
  const Vector a{{1.0, 2.0, 3.0}};
  const Vector b{{0.5, 4.0, -1.0}};
  const SymmetricMatrix da = SymmetricMatrix::diagonal(a);
  const SymmetricMatrix db = SymmetricMatrix::diagonal(b);
  const Vector ab = a.cwiseProduct(b);
  EXPECT_EQ(baseline_dynamic_laplacian(da, db).matrix(),
            Matrix(ab.cwiseProduct(ab).asDiagonal()));
  EXPECT_EQ(baseline_hat_S(da, db).matrix(), Matrix((2.0 * ab).asDiagonal()));
  EXPECT_EQ(baseline_hat_A(da, db), Matrix::Zero(3, 3));
}

TEST(Baselines, AlgebraicSymmetries) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SpdMatrix w1 = random_spd(9, 100, 60 + seed);
    const SpdMatrix w2 = random_spd(9, 100, 70 + seed);
    const SymmetricMatrix& a = w1.symmetric();
    const SymmetricMatrix& b = w2.symmetric();
    EXPECT_GE(sym_eig(baseline_dynamic_laplacian(a, b)).values.minCoeff(), -1e-12);
    EXPECT_LE((baseline_hat_S(a, b).matrix() - baseline_hat_S(b, a).matrix()).norm(), 1e-14);
    const Matrix hat_a = baseline_hat_A(a, b);
    EXPECT_LE((hat_a + baseline_hat_A(b, a)).norm(), 1e-14);
    EXPECT_LE((hat_a + hat_a.transpose()).norm(), 1e-14);
    EXPECT_LE((baseline_hat_S(a, a).matrix() - 2.0 * a.matrix() * a.matrix()).norm(), 1e-13);
    EXPECT_EQ(baseline_hat_A(a, a), Matrix::Zero(9, 9));
    const Embedding e = svd_embed(hat_a, 4);
    EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(4, 4)).norm(), 1e-10);
  }
}
