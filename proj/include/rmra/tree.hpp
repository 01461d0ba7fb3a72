#pragma once

// Dyadic multi-resolution tree over a sequence of T = 2^m operators.
// Level 1 composes frame pairs (2t-1, 2t); level l composes the S operators of
// its two children. F at every node is Log_S(first child).

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rmra/composite.hpp"
#include "rmra/matrix_io.hpp"
#include "rmra/parallel.hpp"

namespace rmra {

/// 1-based inclusive frame range covered by node (level, t).
inline std::pair<Index, Index> covered_range(int level, Index t) {
  if (level < 1 || level > 62 || t < 1) {
    throw ValidationError("covered_range: invalid node (level " + std::to_string(level) +
                          ", t " + std::to_string(t) + ")");
  }
  const Index span = Index{1} << level;
  return {(t - 1) * span + 1, t * span};
}

inline int tree_depth(Index T) {
  if (T < 2 || (T & (T - 1)) != 0) {
    Index largest = 1;
    while (largest * 2 <= T) largest *= 2;
    throw ValidationError("sequence length " + std::to_string(T) +
                          " is not a power of two >= 2; truncate to the first " +
                          std::to_string(largest) + " frames");
  }
  int depth = 0;
  while ((Index{1} << depth) < T) ++depth;
  return depth;
}

struct TreeNode {
  int level = 0;
  Index t = 0;
  CompositeS S;
  SymmetricMatrix F;

  std::pair<Index, Index> range() const { return covered_range(level, t); }
  SymmetricMatrix S_dense() const { return dense(S); }
};

struct TreeConfig {
  GeodesicParam p;
  Routing routing = Routing::Auto;
  RankPolicy rank = RankPolicy::relative();
  unsigned threads = 1;
};

struct TreeInfo {
  Index N = 0;
  Index T = 0;
  int levels = 0;
  double p = 0.5;
  bool spsd = false;
};

namespace detail {

inline TreeNode compose_node(int level, Index t, const CompositeS& a, const CompositeS& b,
                             GeodesicParam p) {
  if (const auto* sa = std::get_if<SpdMatrix>(&a)) {
    const auto& sb = std::get<SpdMatrix>(b);
    SpdMatrix s = compose_S(*sa, sb, p);
    SymmetricMatrix f = compose_F_at(s, *sa);
    return {level, t, std::move(s), std::move(f)};
  }
  auto [fa, fb] = match_rank(std::get<SpsdFactors>(a), std::get<SpsdFactors>(b));
  SpsdFactors s = spsd_geodesic(fa, fb, p);
  SymmetricMatrix f = spsd_compose_F(s, fa);
  return {level, t, std::move(s), std::move(f)};
}

}  // namespace detail

/// Builds the tree level by level, handing each finished node to `sink` in
/// (level, t) order. Only the previous level's S operators stay in memory.
/// Nodes of one level run on up to cfg.threads workers; the output does not
/// depend on the thread count.
inline TreeInfo build_tree_streaming(const std::vector<SymmetricMatrix>& ops,
                                     const TreeConfig& cfg,
                                     const std::function<void(const TreeNode&)>& sink) {
  const Index T = static_cast<Index>(ops.size());
  const int depth = tree_depth(T);
  const Index n = ops.front().dim();
  for (Index k = 0; k < T; ++k) {
    if (ops[static_cast<std::size_t>(k)].dim() != n) {
      throw ValidationError("build_tree: frame " + std::to_string(k + 1) + " is " +
                            std::to_string(ops[static_cast<std::size_t>(k)].dim()) +
                            "x, expected " + std::to_string(n));
    }
  }

  std::vector<EigenSystem> eig(static_cast<std::size_t>(T));
  parallel_for(eig.size(), cfg.threads, [&](std::size_t k) { eig[k] = sym_eig(ops[k]); });
  bool spsd = cfg.routing == Routing::ForceSpsd;
  if (cfg.routing == Routing::Auto) {
    for (const auto& e : eig) spsd = spsd || needs_spsd(e);
  }

  std::vector<std::optional<CompositeS>> current(static_cast<std::size_t>(T));
  parallel_for(current.size(), cfg.threads, [&](std::size_t k) {
    if (spsd) {
      current[k] = spsd_factorize(eig[k], cfg.rank);
    } else {
      current[k] = SpdMatrix::from_eigensystem(ops[k], std::move(eig[k]));
    }
  });
  eig.clear();

  for (int level = 1; level <= depth; ++level) {
    const std::size_t count = current.size() / 2;
    std::vector<std::optional<TreeNode>> nodes(count);
    parallel_for(count, cfg.threads, [&](std::size_t i) {
      nodes[i] = detail::compose_node(level, static_cast<Index>(i + 1), *current[2 * i],
                                      *current[2 * i + 1], cfg.p);
    });
    std::vector<std::optional<CompositeS>> next(count);
    for (std::size_t i = 0; i < count; ++i) {
      sink(*nodes[i]);
      next[i] = std::move(nodes[i]->S);
    }
    current = std::move(next);
  }
  return {n, T, depth, cfg.p.value(), spsd};
}

class OperatorTree {
 public:
  OperatorTree(TreeInfo info, std::vector<std::vector<TreeNode>> levels)
      : info_(info), levels_(std::move(levels)) {}

  const TreeInfo& info() const noexcept { return info_; }
  int depth() const noexcept { return info_.levels; }
  Index node_count() const noexcept { return info_.T - 1; }

  const std::vector<TreeNode>& level(int l) const {
    if (l < 1 || l > depth()) {
      throw ValidationError("tree has no level " + std::to_string(l) + " (levels 1.." +
                            std::to_string(depth()) + ")");
    }
    return levels_[static_cast<std::size_t>(l - 1)];
  }

  const TreeNode& node(int l, Index t) const {
    const auto& lv = level(l);
    if (t < 1 || t > static_cast<Index>(lv.size())) {
      throw ValidationError("level " + std::to_string(l) + " has no node " + std::to_string(t) +
                            " (1.." + std::to_string(lv.size()) + ")");
    }
    return lv[static_cast<std::size_t>(t - 1)];
  }

  const TreeNode& root() const { return node(depth(), 1); }

 private:
  TreeInfo info_;
  std::vector<std::vector<TreeNode>> levels_;
};

inline OperatorTree build_tree(const std::vector<SymmetricMatrix>& ops,
                               const TreeConfig& cfg = {}) {
  std::vector<std::vector<TreeNode>> levels;
  const TreeInfo info = build_tree_streaming(ops, cfg, [&](const TreeNode& node) {
    if (static_cast<int>(levels.size()) < node.level) levels.emplace_back();
    levels.back().push_back(node);
  });
  return OperatorTree(info, std::move(levels));
}

/// Per-node embeddings of S (by value) and F (by the given selection).
struct NodeEmbeddings {
  Embedding S;
  Embedding F;
};

inline NodeEmbeddings node_embeddings(const TreeNode& node, Index m,
                                      Selection f_selection = Selection::top_by_abs_value()) {
  return {embed(node.S_dense(), m, Selection::top_by_value()), embed(node.F, m, f_selection)};
}

// On-disk layout: manifest.json plus S_L{l}_t{t}.rmra and F_L{l}_t{t}.rmra
// for every node; S is stored densely on both paths.

inline std::string node_file(char which, int level, Index t) {
  return std::string(1, which) + "_L" + std::to_string(level) + "_t" + std::to_string(t) +
         ".rmra";
}

class TreeWriter {
 public:
  explicit TreeWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void operator()(const TreeNode& node) {
    io::write_binary(dir_ / node_file('S', node.level, node.t), node.S_dense().matrix());
    io::write_binary(dir_ / node_file('F', node.level, node.t), node.F.matrix());
    const auto [lo, hi] = node.range();
    nlohmann::ordered_json entry;
    entry["level"] = node.level;
    entry["t"] = node.t;
    entry["range"] = {lo, hi};
    entry["S"] = node_file('S', node.level, node.t);
    entry["F"] = node_file('F', node.level, node.t);
    if (const auto* f = std::get_if<SpsdFactors>(&node.S)) entry["rank"] = f->rank();
    nodes_.push_back(std::move(entry));
  }

  void finish(const TreeInfo& info, const nlohmann::ordered_json& extra = {}) {
    nlohmann::ordered_json m;
    m["format"] = "rmra-tree";
    m["version"] = 1;
    m["N"] = info.N;
    m["T"] = info.T;
    m["p"] = info.p;
    m["routing"] = info.spsd ? "spsd" : "spd";
    m["levels"] = info.levels;
    m["nodes"] = nodes_;
    if (!extra.is_null()) m["run"] = extra;
    std::ofstream os(dir_ / "manifest.json", std::ios::trunc);
    if (!os) throw ValidationError("cannot write " + (dir_ / "manifest.json").string());
    os << m.dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
  nlohmann::ordered_json nodes_ = nlohmann::ordered_json::array();
};

inline TreeInfo save_tree(const OperatorTree& tree, const std::filesystem::path& dir) {
  TreeWriter writer(dir);
  for (int l = 1; l <= tree.depth(); ++l) {
    for (const auto& node : tree.level(l)) writer(node);
  }
  writer.finish(tree.info());
  return tree.info();
}

struct TreeManifest {
  TreeInfo info;
  nlohmann::json raw;
};

inline TreeManifest read_tree_manifest(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw ValidationError("no manifest.json in " + dir.string());
  TreeManifest out;
  try {
    out.raw = nlohmann::json::parse(is);
    if (out.raw.at("format") != "rmra-tree") throw ValidationError("not a tree manifest");
    out.info.N = out.raw.at("N").get<Index>();
    out.info.T = out.raw.at("T").get<Index>();
    out.info.levels = out.raw.at("levels").get<int>();
    out.info.p = out.raw.at("p").get<double>();
    out.info.spsd = out.raw.at("routing").get<std::string>() == "spsd";
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(dir.string() + "/manifest.json: " + e.what());
  }
  if (tree_depth(out.info.T) != out.info.levels) {
    throw ValidationError(dir.string() + "/manifest.json: levels inconsistent with T");
  }
  return out;
}

/// Loads S or F of node (level, t) from a saved tree.
inline SymmetricMatrix load_tree_operator(const std::filesystem::path& dir, char which, int level,
                                          Index t) {
  if (which != 'S' && which != 'F') throw ValidationError("operator must be S or F");
  const TreeManifest m = read_tree_manifest(dir);
  if (level < 1 || level > m.info.levels || t < 1 || t > (m.info.T >> level)) {
    throw ValidationError("tree has no node (level " + std::to_string(level) + ", t " +
                          std::to_string(t) + ")");
  }
  return SymmetricMatrix(io::read_binary(dir / node_file(which, level, t)));
}

}  // namespace rmra
