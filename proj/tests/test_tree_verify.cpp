#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "rmra/tree.hpp"
#include "rmra/verify.hpp"

using namespace rmra;

namespace {

constexpr double kSqrt24 = 4.898979485566356;
constexpr double kScalarRootF = -4.388896441408751;  // sqrt(24) ln(2 / sqrt(24))

std::vector<SymmetricMatrix> random_frames(Index n, Index t, std::uint64_t seed) {
  std::vector<SymmetricMatrix> out;
  for (Index k = 0; k < t; ++k) {
    out.push_back(random_spd_pair(n, 1e3, seed * 1000 + static_cast<std::uint64_t>(k)).first.symmetric());
  }
  return out;
}

SymmetricMatrix scalar(double v) { return SymmetricMatrix(Matrix::Constant(1, 1, v)); }

bool same_bytes(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

// tree --------------------------------------------------------------------

TEST(TreeIndexing, CoveredRange) {
  EXPECT_EQ(covered_range(1, 1), (std::pair<Index, Index>{1, 2}));
  EXPECT_EQ(covered_range(6, 3), (std::pair<Index, Index>{129, 192}));
  EXPECT_EQ(covered_range(8, 1), (std::pair<Index, Index>{1, 256}));
  EXPECT_THROW(covered_range(0, 1), ValidationError);
  EXPECT_THROW(covered_range(1, 0), ValidationError);
}

TEST(TreeIndexing, DepthNeedsPowerOfTwo) {
  EXPECT_EQ(tree_depth(2), 1);
  EXPECT_EQ(tree_depth(256), 8);
  EXPECT_THROW(tree_depth(1), ValidationError);
  try {
    tree_depth(6);
    FAIL() << "expected a ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("first 4 frames"), std::string::npos) << e.what();
  }
}

TEST(Tree, TwoFramesMatchCompose) {
  const auto frames = random_frames(6, 2, 1);
  const OperatorTree tree = build_tree(frames);
  ASSERT_EQ(tree.depth(), 1);
  ASSERT_EQ(tree.node_count(), 1);
  const CompositePair pair = compose(frames[0], frames[1]);
  EXPECT_LE((tree.root().S_dense().matrix() - pair.S_dense().matrix()).norm(), 1e-14);
  EXPECT_LE((tree.root().F.matrix() - pair.F.matrix()).norm(), 1e-14);
}

TEST(Tree, ConstantSequence) {
  const SymmetricMatrix w = random_frames(5, 1, 2).front();
  const OperatorTree tree = build_tree(std::vector<SymmetricMatrix>(8, w));
  for (int l = 1; l <= 3; ++l) {
    for (const auto& node : tree.level(l)) {
      EXPECT_LE((node.S_dense().matrix() - w.matrix()).norm(), 1e-12 * w.matrix().norm());
      EXPECT_LE(node.F.matrix().norm(), 1e-12);
    }
  }
  const NodeEmbeddings e = node_embeddings(tree.root(), 3);
  EXPECT_LE(e.F.values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tree, ScalarHandValues) {
  const OperatorTree tree = build_tree({scalar(1), scalar(4), scalar(9), scalar(16)});
  EXPECT_NEAR(tree.node(1, 1).S_dense()(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(tree.node(1, 2).S_dense()(0, 0), 12.0, 1e-13);
  EXPECT_NEAR(tree.node(1, 1).F(0, 0), 2.0 * std::log(0.5), 1e-14);
  EXPECT_NEAR(tree.root().S_dense()(0, 0), kSqrt24, 1e-13);
  EXPECT_NEAR(tree.root().F(0, 0), kScalarRootF, 1e-13);
  // negative: the first half (2) is below the second (12)
  EXPECT_LT(tree.root().F(0, 0), 0.0);
}

TEST(Tree, NodesAreMidpointsOfChildren) {
  const OperatorTree tree = build_tree(random_frames(5, 8, 3));
  EXPECT_EQ(tree.node_count(), 7);
  EXPECT_EQ(tree.level(1).size(), 4u);
  EXPECT_EQ(tree.level(2).size(), 2u);
  EXPECT_EQ(tree.level(3).size(), 1u);
  for (int l = 2; l <= 3; ++l) {
    for (const auto& node : tree.level(l)) {
      const SpdMatrix a = std::get<SpdMatrix>(tree.node(l - 1, 2 * node.t - 1).S);
      const SpdMatrix b = std::get<SpdMatrix>(tree.node(l - 1, 2 * node.t).S);
      const SpdMatrix& s = std::get<SpdMatrix>(node.S);
      EXPECT_LE(relative_frobenius(s.matrix(), midpoint(a, b).matrix()), 1e-13);
      EXPECT_NEAR(riemannian_distance(s, a), riemannian_distance(s, b), 1e-8);
      EXPECT_LE((node.F.matrix() - log_map(s, a).matrix()).norm(), 1e-12 * node.F.matrix().norm());
      EXPECT_EQ(node.range(), covered_range(l, node.t));
    }
  }
}

TEST(Tree, GeneralParameter) {
  const auto frames = random_frames(4, 4, 4);
  TreeConfig cfg;
  cfg.p = GeodesicParam(0.25);
  const OperatorTree tree = build_tree(frames, cfg);
  const SpdMatrix expected =
      geodesic(std::get<SpdMatrix>(tree.node(1, 1).S), std::get<SpdMatrix>(tree.node(1, 2).S), cfg.p);
  EXPECT_LE(relative_frobenius(tree.root().S_dense().matrix(), expected.matrix()), 1e-13);
  EXPECT_EQ(tree.info().p, 0.25);
}

TEST(Tree, ThreadCountDoesNotChangeBytes) {
  const auto frames = random_frames(6, 8, 5);
  TreeConfig one;
  TreeConfig two;
  two.threads = 2;
  const OperatorTree a = build_tree(frames, one);
  const OperatorTree b = build_tree(frames, two);
  for (int l = 1; l <= 3; ++l) {
    for (Index t = 1; t <= static_cast<Index>(a.level(l).size()); ++t) {
      EXPECT_TRUE(same_bytes(a.node(l, t).S_dense().matrix(), b.node(l, t).S_dense().matrix()));
      EXPECT_TRUE(same_bytes(a.node(l, t).F.matrix(), b.node(l, t).F.matrix()));
    }
  }
}

TEST(Tree, RankDeficientFramesStayInCommonRange) {
  Rng rng(6);
  const Vector z = random_orthonormal(5, 1, rng).col(0);
  const Matrix proj = Matrix::Identity(5, 5) - z * z.transpose();
  std::vector<SymmetricMatrix> frames;
  for (const auto& f : random_frames(5, 4, 7)) frames.push_back(congruence(proj, f));
  const OperatorTree tree = build_tree(frames);
  EXPECT_TRUE(tree.info().spsd);
  for (int l = 1; l <= 2; ++l) {
    for (const auto& node : tree.level(l)) {
      EXPECT_EQ(std::get<SpsdFactors>(node.S).rank(), 4);
      EXPECT_LE((node.S_dense().matrix() * z).norm(), 1e-10);
      EXPECT_LE((node.F.matrix() * z).norm(), 1e-10);
    }
  }
}

TEST(Tree, RejectsMismatchedFrames) {
  auto frames = random_frames(3, 4, 8);
  frames[2] = random_frames(4, 1, 9).front();
  EXPECT_THROW(build_tree(frames), ValidationError);
  EXPECT_THROW(build_tree(random_frames(3, 3, 8)), ValidationError);
}

TEST(Tree, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "rmra_tree_test";
  std::filesystem::remove_all(dir);
  const OperatorTree tree = build_tree(random_frames(4, 8, 10));
  save_tree(tree, dir);
  const TreeManifest m = read_tree_manifest(dir);
  EXPECT_EQ(m.info.N, 4);
  EXPECT_EQ(m.info.T, 8);
  EXPECT_EQ(m.info.levels, 3);
  EXPECT_FALSE(m.info.spsd);
  ASSERT_EQ(m.raw.at("nodes").size(), 7u);
  EXPECT_EQ(m.raw.at("nodes")[6].at("range"), nlohmann::json::array({1, 8}));
  for (int l = 1; l <= 3; ++l) {
    for (const auto& node : tree.level(l)) {
      EXPECT_TRUE(same_bytes(load_tree_operator(dir, 'S', l, node.t).matrix(), node.S_dense().matrix()));
      EXPECT_TRUE(same_bytes(load_tree_operator(dir, 'F', l, node.t).matrix(), node.F.matrix()));
    }
  }
  EXPECT_THROW(load_tree_operator(dir, 'S', 3, 2), ValidationError);
  EXPECT_THROW(load_tree_operator(dir, 'X', 1, 1), ValidationError);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(read_tree_manifest(dir), ValidationError);
}

// verify ------------------------------------------------------------------

TEST(CommonSpectrum, ToyInstance) {
  const ToyPair toy = toy_spd_pair();
  const SpdMatrix w1(toy.M1);
  const SpdMatrix w2(toy.M2);
  const Report r1 = check_common_S(w1, w2, toy.Psi, toy.lambda1, toy.lambda2);
  const Report r2 = check_common_F(w1, w2, toy.Psi, toy.lambda1, toy.lambda2);
  EXPECT_TRUE(r1.pass);
  EXPECT_TRUE(r2.pass);
  EXPECT_LE(r1.max_residual, 1e-10);
  EXPECT_LE(r2.max_residual, 1e-9);
  // lambda1 == lambda2 on psi_2 and psi_4 leaves two indices for the sign rule
  EXPECT_EQ(r2.details.at("sign_checked"), 2);
  EXPECT_EQ(r2.details.at("sign_errors"), 0);
}

TEST(CommonSpectrum, EqualOperators) {
  CommonSpectrumSpec spec = random_common_spec(8, 3);
  spec.lambda2 = spec.lambda1;
  const auto [w1, w2] = make_common_pair(spec);
  EXPECT_TRUE(check_common_S(w1, w2, spec.Psi, spec.lambda1, spec.lambda2).pass);
  const Report r2 = check_common_F(w1, w2, spec.Psi, spec.lambda1, spec.lambda2);
  EXPECT_TRUE(r2.pass);
  EXPECT_LE(r2.max_residual, 1e-12);
}

TEST(CommonSpectrum, RandomSpecs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CommonSpectrumSpec spec = random_common_spec(12, seed);
    const auto [w1, w2] = make_common_pair(spec);
    EXPECT_TRUE(check_common_S(w1, w2, spec.Psi, spec.lambda1, spec.lambda2).pass) << seed;
    EXPECT_TRUE(check_common_F(w1, w2, spec.Psi, spec.lambda1, spec.lambda2).pass) << seed;
  }
  CommonSpectrumSpec bad = random_common_spec(4, 0);
  bad.lambda1[0] = 0.0;
  EXPECT_THROW(make_common_pair(bad), ValidationError);
}

TEST(PseudoResidual, HandCases) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const SymmetricMatrix m(d);
  for (double th : {0.0, 0.3, 1.2, 2.5}) {
    const Vector v{{std::cos(th), std::sin(th)}};
    EXPECT_NEAR(pseudo_residual(m, 1.0, v), std::abs(std::sin(th)), 1e-15);
    EXPECT_EQ(pseudo_residual(m, 1.0, v), pseudo_residual(m, 1.0, Vector(-v)));
  }
  EXPECT_THROW(pseudo_residual(m, 1.0, Vector{{1.0, 1.0}}), ValidationError);
}

TEST(PseudoResidual, RankOneCompletion) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const SymmetricMatrix m(d);
  const Vector e1{{1.0, 0.0}};
  const Matrix b = rank_one_completion(m, 1.5, e1);
  EXPECT_NEAR(b.norm(), 0.5, 1e-15);
  EXPECT_LE(((d + b) * e1 - 1.5 * e1).norm(), 1e-15);

  Rng rng(4);
  const SymmetricMatrix r = random_frames(6, 1, 11).front();
  const Vector v = random_orthonormal(6, 1, rng).col(0);
  const Matrix c = rank_one_completion(r, 0.3, v);
  EXPECT_LE(((r.matrix() + c) * v - 0.3 * v).norm(), 1e-14);
  EXPECT_NEAR(c.norm(), pseudo_residual(r, 0.3, v), 1e-14);
}

TEST(PseudoS, ZeroPerturbationIsExact) {
  const CommonSpectrumSpec spec = random_common_spec(10, 5);
  const PerturbedPair pp = make_perturbed_pair(spec, 2, 0.0, 5);
  EXPECT_EQ(pp.budget, 0.0);
  EXPECT_LE(pp.perturbation, 1e-15);
  const SpdMatrix s = compose_S(pp.W1, pp.W2);
  EXPECT_LE(pseudo_residual(s.symmetric(), std::sqrt(spec.lambda1[2] * spec.lambda2[2]), pp.psi1),
            1e-13);
}

TEST(PseudoS, PerturbationUsesTheBudgetAndScales) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CommonSpectrumSpec spec = random_common_spec(20, seed);
    const Index j = static_cast<Index>(seed * 3 % 20);
    const PerturbedPair pp = make_perturbed_pair(spec, j, 1e-3, seed);
    if (pp.budget < std::sqrt(2.0)) {
      EXPECT_NEAR(pp.perturbation, pp.budget, 1e-12 + 1e-9 * pp.budget);
    }
    const Report coarse = check_pseudo_S(spec, j, 1e-2, seed);
    const Report fine = check_pseudo_S(spec, j, 1e-3, seed);
    EXPECT_TRUE(coarse.pass) << coarse.max_residual << " vs " << coarse.budget;
    EXPECT_TRUE(fine.pass) << fine.max_residual << " vs " << fine.budget;
    EXPECT_LE(fine.max_residual / coarse.max_residual, 0.2) << seed;
  }
}

TEST(PseudoF, SpecConstruction) {
  const PerturbationSpec ps = make_perturbation_spec(10, 2.0, 0.1, 3);
  EXPECT_GE(ps.gamma.minCoeff(), 0.1 - 1e-15);
  const Vector ratio = ps.base.lambda2.cwiseQuotient(ps.base.lambda1);
  EXPECT_GE(ratio.minCoeff(), 0.5 - 1e-15);
  EXPECT_LE(ratio.maxCoeff(), 2.0 + 1e-15);
  EXPECT_NO_THROW(ps.base.validate());
  EXPECT_NEAR(Eigen::JacobiSVD<Matrix>(ps.A).singularValues()(0), 1.0, 1e-14);
  EXPECT_THROW(make_perturbation_spec(20, 2.0, 0.1, 0), ValidationError);
  EXPECT_THROW(make_perturbation_spec(4, 1.0, 0.1, 0), ValidationError);
}

TEST(PseudoF, ZeroPerturbationIsExact) {
  const PerturbationSpec ps = make_perturbation_spec(6, 2.0, 0.1, 4);
  for (Index j = 0; j < 6; ++j) EXPECT_LE(pseudo_F_residual(ps, j, 0.0), 1e-13);
}

TEST(PseudoF, FirstOrderInEps) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Report r = check_pseudo_F(make_perturbation_spec(10, 2.0, 0.1, seed),
                                    static_cast<Index>(seed));
    EXPECT_TRUE(r.pass) << r.to_json().dump();
    EXPECT_LT(r.max_residual, kPseudoFSpreadLimit);
  }
}

// Two specs that differ only in the ratio gap; the smaller gap is expected to
// give the larger residual.
TEST(PseudoF, SmallerGapGivesLargerResidual) {
  auto worst = [](double gamma_min) {
    const PerturbationSpec ps = make_perturbation_spec(10, 2.0, gamma_min, 0);
    double r = 0.0;
    for (Index j = 0; j < 10; ++j) r = std::max(r, pseudo_F_residual(ps, j, 1e-3));
    return r;
  };
  const double wide = worst(0.1);
  const double narrow = worst(0.05);
  EXPECT_GT(narrow, wide);
}

TEST(EquivalentForms, EqualToyAndRandom) {
  const SpdMatrix w = random_spd_pair(8, 1e4, 1).first;
  const EquivalentForms same = equivalent_forms(w, w);
  EXPECT_LE(same.s_discrepancy, 1e-12);
  EXPECT_LE(same.f_discrepancy, 1e-12);

  const ToyPair toy = toy_spd_pair();
  const EquivalentForms t = equivalent_forms(SpdMatrix(toy.M1), SpdMatrix(toy.M2));
  EXPECT_LE(t.s_discrepancy, 1e-10);
  EXPECT_LE(t.f_discrepancy, 1e-10);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [a, b] = random_spd_pair(10 + static_cast<Index>(seed) * 5, 1e6, seed);
    EXPECT_TRUE(check_equivalent_forms(a, b).pass) << seed;
    EXPECT_TRUE(check_reconstruction(a, b).pass) << seed;
  }
}

TEST(MatchSpectrum, RepeatedValuesCompareSubspaces) {
  Rng rng(3);
  const Matrix q = random_orthonormal(4, rng);
  const Vector values{{1.0, 1.0, 0.5, 0.25}};
  const SymmetricMatrix m = congruence(q, SymmetricMatrix::diagonal(values));
  const SpectrumMatch match = match_spectrum(sym_eig(m), values, q);
  EXPECT_LE(match.value_residual, 1e-15);
  EXPECT_LE(match.angle_residual, 1e-7);
}

TEST(Suites, AllPassAndAreDeterministic) {
  const SuiteConfig cfg{4, 8, 21};
  for (const auto& name : suite_names()) {
    const auto a = run_suite(name, cfg);
    const auto b = run_suite(name, cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_TRUE(a[k].pass) << a[k].to_json().dump();
      EXPECT_EQ(a[k].to_json().dump(), b[k].to_json().dump());
    }
  }
  EXPECT_EQ(run_suite("pseudo", cfg).front().instances, 12);
  EXPECT_THROW(run_suite("bogus", cfg), ValidationError);
  EXPECT_THROW(run_suite("toy", SuiteConfig{0, 8, 0}), ValidationError);
}
