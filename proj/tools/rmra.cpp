// rmra: batch front end for generators, kernels, composition, trees,
// clustering, oracle verification and plot data.
//
// Exit codes: 0 success, 1 invalid input or flags, 2 numerical failure,
// 3 verification failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rmra/rmra.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using rmra::Index;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerify = 3;

constexpr const char* kVersion = "1.0.0";

struct Global {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
  std::string routing = "auto";

  fs::path out_dir() const {
    if (!out.empty()) return out;
    if (const char* env = std::getenv("RMRA_OUT"); env && *env) return env;
    return "rmra_out";
  }

  json to_json() const {
    json j;
    j["seed"] = seed;
    j["threads"] = threads;
    j["routing"] = routing;
    return j;
  }
};

fs::path prepare(const Global& g) {
  const fs::path dir = g.out_dir();
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw rmra::ValidationError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json manifest(const std::string& command, const Global& g) {
  json m;
  m["tool"] = "rmra";
  m["version"] = kVersion;
  m["command"] = command;
  m["global"] = g.to_json();
  return m;
}

std::vector<double> to_vec(const rmra::Vector& v) { return {v.begin(), v.end()}; }

rmra::KernelConfig kernel_config(double scale, std::optional<double> sigma) {
  return sigma ? rmra::KernelConfig::fixed(*sigma) : rmra::KernelConfig::median_times(scale);
}

// Embedding CSV: one comment line with the eigenvalues, then one row per point.
void write_embedding(const fs::path& path, const rmra::Embedding& e) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw rmra::ValidationError("cannot write " + path.string());
  os << "# eigenvalues";
  for (Index c = 0; c < e.values.size(); ++c) os << ',' << rmra::io::format_double(e.values[c]);
  os << '\n';
  rmra::io::write_csv(os, e.vectors);
}

void write_column(const fs::path& path, const rmra::Vector& v) {
  rmra::io::write_csv(path, rmra::Matrix(v));
}

rmra::Selection parse_selection(const std::string& s, Index k) {
  if (s == "value") return rmra::Selection::top_by_value();
  if (s == "abs") return rmra::Selection::top_by_abs_value();
  if (s == "signed") return rmra::Selection::signed_pairs(k);
  throw rmra::ValidationError("unknown selection '" + s + "' (value, abs or signed)");
}

// gen ---------------------------------------------------------------------

struct GenOpts {
  std::string kind;
  Index n = 0;
  Index t = 0;
  std::optional<double> dt;
  double max_step = 1.0 / 256.0;
  std::string integrator = "rk4";
  double r = 2.0, R = 7.0, Rt = 15.0;
};

int cmd_gen(const GenOpts& o, const Global& g) {
  const fs::path dir = prepare(g);
  json m = manifest("gen", g);
  m["kind"] = o.kind;
  if (o.kind == "toy-spd" || o.kind == "toy-spsd") {
    const rmra::ToyPair toy = o.kind == "toy-spd" ? rmra::toy_spd_pair() : rmra::toy_spsd_pair();
    rmra::io::write_binary(dir / "M1.rmra", toy.M1.matrix());
    rmra::io::write_binary(dir / "M2.rmra", toy.M2.matrix());
    rmra::io::write_binary(dir / "Psi.rmra", toy.Psi);
    m["files"] = {"M1.rmra", "M2.rmra", "Psi.rmra"};
    m["lambda1"] = to_vec(toy.lambda1);
    m["lambda2"] = to_vec(toy.lambda2);
  } else if (o.kind == "gyre") {
    rmra::GyreConfig cfg;
    cfg.N = o.n ? o.n : cfg.N;
    cfg.T = o.t ? o.t : cfg.T;
    cfg.dt = o.dt ? *o.dt : 1.0 / static_cast<double>(cfg.T);
    cfg.max_step = o.max_step;
    cfg.seed = g.seed;
    cfg.integrator = o.integrator == "euler" ? rmra::Integrator::Euler : rmra::Integrator::RK4;
    const rmra::TrajectorySet traj = rmra::double_gyre(cfg, g.threads);
    fs::create_directories(dir / "frames");
    json files = json::array();
    for (Index k = 0; k < traj.T(); ++k) {
      const std::string name = rmra::io::frame_name("frame", k + 1);
      rmra::io::write_binary(dir / "frames" / name, traj.frames[static_cast<std::size_t>(k)]);
      files.push_back("frames/" + name);
    }
    m["N"] = cfg.N;
    m["T"] = cfg.T;
    m["dt"] = cfg.dt;
    m["substeps"] = cfg.substeps();
    m["integrator"] = o.integrator;
    m["c1"] = cfg.c1;
    m["c2"] = cfg.c2;
    m["times"] = traj.times;
    m["files"] = files;
  } else {
    rmra::TorusConfig cfg;
    cfg.N = o.n ? o.n : cfg.N;
    cfg.r = o.r;
    cfg.R = o.R;
    cfg.Rt = o.Rt;
    cfg.seed = g.seed;
    cfg.variant = o.kind == "tori-common" ? rmra::TorusVariant::Common : rmra::TorusVariant::Unique;
    const rmra::ToriData d = rmra::tori(cfg);
    rmra::io::write_binary(dir / "X1.rmra", d.X1.points());
    rmra::io::write_binary(dir / "X2.rmra", d.X2.points());
    rmra::io::write_binary(dir / "angles.rmra", d.angles);
    m["N"] = cfg.N;
    m["radii"] = {cfg.r, cfg.R, cfg.Rt};
    m["files"] = {"X1.rmra", "X2.rmra", "angles.rmra"};
  }
  write_json(dir / "manifest.json", m);
  return kExitOk;
}

// kernel ------------------------------------------------------------------

struct KernelOpts {
  std::vector<std::string> inputs;
  double bandwidth_scale = 1.0;
  std::optional<double> sigma;
  std::string prefix;
  bool frame_column = false;
};

int cmd_kernel(const KernelOpts& o, const Global& g) {
  std::vector<rmra::Matrix> frames;
  if (o.inputs.size() == 1) {
    const fs::path in = o.inputs.front();
    if (fs::is_directory(in) || o.frame_column) {
      frames = rmra::io::read_sequence(in, o.prefix);
    } else {
      frames.push_back(rmra::io::read_matrix(in));
    }
  } else {
    for (const auto& f : o.inputs) frames.push_back(rmra::io::read_matrix(f));
  }
  const rmra::KernelConfig cfg = kernel_config(o.bandwidth_scale, o.sigma);
  cfg.validate();
  std::vector<rmra::DiffusionOperator> ops(frames.size());
  rmra::parallel_for(frames.size(), g.threads, [&](std::size_t k) {
    ops[k] = rmra::diffusion_operator(rmra::Dataset(frames[k]), cfg);
  });
  const fs::path dir = prepare(g);
  json m = manifest("kernel", g);
  m["inputs"] = o.inputs;
  m["bandwidth_rule"] = o.sigma ? "fixed" : "median_times_scale";
  m["bandwidth_scale"] = o.bandwidth_scale;
  json sigmas = json::array();
  json files = json::array();
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const std::string name = rmra::io::frame_name("W", static_cast<Index>(k + 1));
    rmra::io::write_binary(dir / name, ops[k].W.matrix());
    sigmas.push_back(ops[k].sigma);
    files.push_back(name);
  }
  m["N"] = frames.front().rows();
  m["T"] = frames.size();
  m["sigma"] = sigmas;
  m["files"] = files;
  write_json(dir / "manifest.json", m);
  return kExitOk;
}

// compose -----------------------------------------------------------------

struct ComposeOpts {
  std::string w1, w2;
  double p = 0.5;
  Index m = 4;
  std::string selection = "abs";
  Index k = 0;
  std::string baseline;
  Index rank = 0;
};

int cmd_compose(const ComposeOpts& o, const Global& g) {
  const rmra::SymmetricMatrix w1(rmra::io::read_matrix(o.w1));
  const rmra::SymmetricMatrix w2(rmra::io::read_matrix(o.w2));
  json m = manifest("compose", g);
  m["inputs"] = {o.w1, o.w2};
  m["M"] = o.m;

  if (!o.baseline.empty()) {
    const fs::path dir = prepare(g);
    m["baseline"] = o.baseline;
    if (o.baseline == "hat-a") {
      const rmra::Matrix a = rmra::baseline_hat_A(w1, w2);
      const rmra::Embedding e = rmra::svd_embed(a, o.m);
      rmra::io::write_binary(dir / "hatA.rmra", a);
      write_embedding(dir / "hatA_embedding.csv", e);
      m["files"] = {"hatA.rmra", "hatA_embedding.csv"};
    } else {
      const bool lap = o.baseline == "dynamic-laplacian";
      const rmra::SymmetricMatrix b =
          lap ? rmra::baseline_dynamic_laplacian(w1, w2) : rmra::baseline_hat_S(w1, w2);
      const std::string stem = lap ? "dynamic_laplacian" : "hatS";
      const rmra::EigenSystem es = rmra::sym_eig(b);
      rmra::io::write_binary(dir / (stem + ".rmra"), b.matrix());
      write_column(dir / (stem + "_eigenvalues.csv"), es.values);
      write_embedding(dir / (stem + "_embedding.csv"),
                      rmra::embed(es, o.m, rmra::Selection::top_by_value()));
      m["files"] = {stem + ".rmra", stem + "_eigenvalues.csv", stem + "_embedding.csv"};
    }
    write_json(dir / "manifest.json", m);
    return kExitOk;
  }

  const rmra::GeodesicParam p(o.p);
  const rmra::RankPolicy rank =
      o.rank > 0 ? rmra::RankPolicy::fixed(o.rank) : rmra::RankPolicy::relative();
  const rmra::CompositePair pair = rmra::compose(w1, w2, p, rmra::parse_routing(g.routing),
                                                 fs::path(o.w1).filename().string(),
                                                 fs::path(o.w2).filename().string(), rank);
  const rmra::Selection f_sel = parse_selection(o.selection, o.k ? o.k : std::max<Index>(1, o.m / 2));
  const rmra::SymmetricMatrix s = pair.S_dense();
  const rmra::EigenSystem es = rmra::sym_eig(s);
  const rmra::EigenSystem ef = rmra::sym_eig(
      pair.F, f_sel.kind == rmra::SelectionKind::TopByAbsValue ? rmra::Ordering::ByAbsValueDesc
                                                               : rmra::Ordering::ByValueDesc);
  const rmra::Embedding s_emb = rmra::embed(es, o.m, rmra::Selection::top_by_value());
  const rmra::Embedding f_emb = rmra::embed(ef, o.m, f_sel);

  const fs::path dir = prepare(g);
  rmra::io::write_binary(dir / "S.rmra", s.matrix());
  rmra::io::write_binary(dir / "F.rmra", pair.F.matrix());
  write_column(dir / "S_eigenvalues.csv", es.values);
  write_column(dir / "F_eigenvalues.csv", ef.values);
  write_embedding(dir / "S_embedding.csv", s_emb);
  write_embedding(dir / "F_embedding.csv", f_emb);
  json files = {"S.rmra", "F.rmra", "S_eigenvalues.csv", "F_eigenvalues.csv",
                "S_embedding.csv", "F_embedding.csv"};
  if (const auto* fac = std::get_if<rmra::SpsdFactors>(&pair.S)) {
    rmra::io::write_binary(dir / "S_V.rmra", fac->V());
    rmra::io::write_binary(dir / "S_Lambda.rmra", fac->Lambda().matrix());
    files.push_back("S_V.rmra");
    files.push_back("S_Lambda.rmra");
  }
  m["p"] = o.p;
  m["path"] = pair.on_spsd_path() ? "spsd" : "spd";
  if (pair.on_spsd_path()) m["rank"] = pair.provenance.rank;
  m["F_selection"] = rmra::to_string(f_sel);
  m["files"] = files;
  write_json(dir / "manifest.json", m);
  return kExitOk;
}

// tree --------------------------------------------------------------------

struct TreeOpts {
  std::string input;
  double p = 0.5;
  Index m = 4;
  Index rank = 0;
  std::string prefix;
  bool points = false;
  double bandwidth_scale = 1.0;
  std::optional<double> sigma;
  bool embeddings = true;
};

std::string embedding_file(char which, int level, Index t) {
  return std::string(1, which) + "_L" + std::to_string(level) + "_t" + std::to_string(t) + ".csv";
}

int cmd_tree(const TreeOpts& o, const Global& g) {
  const std::vector<rmra::Matrix> frames = rmra::io::read_sequence(o.input, o.prefix);
  std::vector<rmra::SymmetricMatrix> ops(frames.size());
  json sigmas = json::array();
  if (o.points) {
    const rmra::KernelConfig cfg = kernel_config(o.bandwidth_scale, o.sigma);
    cfg.validate();
    std::vector<double> sig(frames.size());
    rmra::parallel_for(frames.size(), g.threads, [&](std::size_t k) {
      rmra::DiffusionOperator op = rmra::diffusion_operator(rmra::Dataset(frames[k]), cfg);
      sig[k] = op.sigma;
      ops[k] = std::move(op.W);
    });
    sigmas = sig;
  } else {
    for (std::size_t k = 0; k < frames.size(); ++k) ops[k] = rmra::SymmetricMatrix(frames[k]);
  }
  rmra::tree_depth(static_cast<Index>(ops.size()));

  rmra::TreeConfig cfg;
  cfg.p = rmra::GeodesicParam(o.p);
  cfg.routing = rmra::parse_routing(g.routing);
  cfg.rank = o.rank > 0 ? rmra::RankPolicy::fixed(o.rank) : rmra::RankPolicy::relative();
  cfg.threads = g.threads;

  const fs::path dir = prepare(g);
  rmra::TreeWriter writer(dir);
  const rmra::TreeInfo info = rmra::build_tree_streaming(ops, cfg, std::ref(writer));
  ops.clear();

  json run = manifest("tree", g);
  run["input"] = o.input;
  run["input_kind"] = o.points ? "points" : "operators";
  if (o.points) {
    run["bandwidth_rule"] = o.sigma ? "fixed" : "median_times_scale";
    run["bandwidth_scale"] = o.bandwidth_scale;
    run["sigma"] = sigmas;
  }
  run["M"] = o.m;
  if (o.embeddings) run["embeddings_dir"] = "embeddings";
  writer.finish(info, run);

  if (o.embeddings) {
    fs::create_directories(dir / "embeddings");
    std::vector<std::pair<int, Index>> nodes;
    for (int l = 1; l <= info.levels; ++l) {
      for (Index t = 1; t <= (info.T >> l); ++t) nodes.emplace_back(l, t);
    }
    rmra::parallel_for(nodes.size(), g.threads, [&](std::size_t i) {
      const auto [l, t] = nodes[i];
      for (char which : {'S', 'F'}) {
        const rmra::SymmetricMatrix op = rmra::load_tree_operator(dir, which, l, t);
        const rmra::Selection sel = which == 'S' ? rmra::Selection::top_by_value()
                                                 : rmra::Selection::top_by_abs_value();
        write_embedding(dir / "embeddings" / embedding_file(which, l, t),
                        rmra::embed(op, std::min(o.m, info.N), sel));
      }
    });
  }
  return kExitOk;
}

// cluster -----------------------------------------------------------------

struct ClusterOpts {
  std::string input;
  int k = 2;
  std::vector<Index> columns;
};

int cmd_cluster(const ClusterOpts& o, const Global& g) {
  const rmra::Matrix emb = rmra::io::read_matrix(o.input);
  if (emb.rows() == 0) throw rmra::ValidationError(o.input + " is empty");
  rmra::Matrix x;
  if (o.columns.empty()) {
    x = emb;
  } else {
    x.resize(emb.rows(), static_cast<Index>(o.columns.size()));
    for (std::size_t c = 0; c < o.columns.size(); ++c) {
      const Index col = o.columns[c];
      if (col < 1 || col > emb.cols()) {
        throw rmra::ValidationError("column " + std::to_string(col) + " out of range 1.." +
                                    std::to_string(emb.cols()));
      }
      x.col(static_cast<Index>(c)) = emb.col(col - 1);
    }
  }
  rmra::KMeansConfig cfg;
  cfg.k = o.k;
  cfg.seed = g.seed;
  const rmra::KMeansResult res = rmra::kmeans(x, cfg);

  const fs::path dir = prepare(g);
  std::ofstream os(dir / "labels.csv", std::ios::trunc);
  if (!os) throw rmra::ValidationError("cannot write labels.csv");
  os << "id,label\n";
  for (std::size_t i = 0; i < res.labels.size(); ++i) os << i << ',' << res.labels[i] << '\n';
  std::vector<Index> sizes(static_cast<std::size_t>(o.k), 0);
  for (int l : res.labels) ++sizes[static_cast<std::size_t>(l)];
  json m = manifest("cluster", g);
  m["input"] = o.input;
  m["k"] = o.k;
  m["columns"] = o.columns;
  m["iterations"] = res.iterations;
  m["converged"] = res.converged;
  m["inertia"] = res.inertia;
  m["sizes"] = sizes;
  write_json(dir / "cluster_manifest.json", m);
  return kExitOk;
}

// verify ------------------------------------------------------------------

struct VerifyOpts {
  std::string suite = "all";
  Index seeds = 100;
  Index n = 20;
};

int cmd_verify(const VerifyOpts& o, const Global& g) {
  std::vector<std::string> suites;
  if (o.suite == "all") {
    suites = rmra::suite_names();
  } else {
    suites.push_back(o.suite);
  }
  rmra::SuiteConfig cfg{o.seeds, o.n, g.seed};
  json report = manifest("verify", g);
  report["suite"] = o.suite;
  report["seeds"] = o.seeds;
  report["n"] = o.n;
  json results = json::array();
  bool pass = true;
  for (const auto& s : suites) {
    for (const auto& r : rmra::run_suite(s, cfg)) {
      json j = r.to_json();
      j["suite"] = s;
      results.push_back(j);
      pass = pass && r.pass;
      std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.oracle << " instances=" << r.instances
                << " max_residual=" << rmra::io::format_double(r.max_residual)
                << " budget=" << rmra::io::format_double(r.budget) << '\n';
    }
  }
  report["results"] = results;
  report["pass"] = pass;
  const fs::path dir = prepare(g);
  write_json(dir / "report.json", report);
  return pass ? kExitOk : kExitVerify;
}

// plotdata ----------------------------------------------------------------

struct PlotOpts {
  std::string input;
  std::string coords;
  int level = 0;
  Index t = 1;
  std::string op = "S";
  Index vector = 2;
  Index frames = 8;
  std::string prefix;
};

void write_plot(const fs::path& path, const rmra::Matrix& xy, const rmra::Vector& v) {
  if (xy.rows() != v.size()) {
    throw rmra::ValidationError("coordinates have " + std::to_string(xy.rows()) +
                                " points but the eigenvector has " + std::to_string(v.size()));
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw rmra::ValidationError("cannot write " + path.string());
  static const char* names[] = {"x", "y", "z", "w"};
  if (xy.cols() > 4) throw rmra::ValidationError("plotdata supports up to 4 coordinates");
  os << "id";
  for (Index c = 0; c < xy.cols(); ++c) os << ',' << names[c];
  os << ",value\n";
  for (Index i = 0; i < xy.rows(); ++i) {
    os << i;
    for (Index c = 0; c < xy.cols(); ++c) os << ',' << rmra::io::format_double(xy(i, c));
    os << ',' << rmra::io::format_double(v[i]) << '\n';
  }
}

int cmd_plotdata(const PlotOpts& o, const Global& g) {
  if (o.op != "S" && o.op != "F") throw rmra::ValidationError("--operator must be S or F");
  const fs::path in = o.input;
  json m = manifest("plotdata", g);
  m["input"] = o.input;
  m["coords"] = o.coords;
  m["vector"] = o.vector;
  json files = json::array();

  if (!fs::is_directory(in)) {
    // A single embedding file plotted over one point set.
    const rmra::Matrix emb = rmra::io::read_matrix(in);
    if (o.vector < 1 || o.vector > emb.cols()) {
      throw rmra::ValidationError("--vector out of range 1.." + std::to_string(emb.cols()));
    }
    const fs::path dir = prepare(g);
    write_plot(dir / "plot.csv", rmra::io::read_matrix(o.coords), emb.col(o.vector - 1));
    files.push_back("plot.csv");
    m["files"] = files;
    write_json(dir / "plot_manifest.json", m);
    return kExitOk;
  }

  const rmra::TreeManifest tm = rmra::read_tree_manifest(in);
  const int level = o.level ? o.level : tm.info.levels;
  if (level < 1 || level > tm.info.levels || o.t < 1 || o.t > (tm.info.T >> level)) {
    throw rmra::ValidationError("tree has no node (level " + std::to_string(level) + ", t " +
                                std::to_string(o.t) + ")");
  }
  const char which = o.op.front();
  rmra::Matrix emb;
  const fs::path stored = in / "embeddings" / embedding_file(which, level, o.t);
  if (fs::exists(stored)) {
    emb = rmra::io::read_matrix(stored);
  } else {
    const rmra::Selection sel = which == 'S' ? rmra::Selection::top_by_value()
                                             : rmra::Selection::top_by_abs_value();
    emb = rmra::embed(rmra::load_tree_operator(in, which, level, o.t),
                      std::min<Index>(std::max<Index>(o.vector, 4), tm.info.N), sel)
              .vectors;
  }
  if (o.vector < 1 || o.vector > emb.cols()) {
    throw rmra::ValidationError("--vector out of range 1.." + std::to_string(emb.cols()));
  }
  const rmra::Vector v = emb.col(o.vector - 1);
  const std::vector<rmra::Matrix> seq = rmra::io::read_sequence(o.coords, o.prefix);
  const auto [lo, hi] = rmra::covered_range(level, o.t);
  if (hi > static_cast<Index>(seq.size())) {
    throw rmra::ValidationError("coordinate sequence has " + std::to_string(seq.size()) +
                                " frames, node covers up to frame " + std::to_string(hi));
  }
  const Index count = std::clamp<Index>(o.frames, 1, hi - lo + 1);
  const fs::path dir = prepare(g);
  for (Index i = 0; i < count; ++i) {
    const Index frame =
        count == 1 ? lo : lo + (i * (hi - lo) + (count - 1) / 2) / (count - 1);
    const std::string name = rmra::io::frame_name("plot", frame, ".csv");
    write_plot(dir / name, seq[static_cast<std::size_t>(frame - 1)], v);
    files.push_back(name);
  }
  m["node"] = {{"level", level}, {"t", o.t}, {"range", {lo, hi}}};
  m["operator"] = o.op;
  m["files"] = files;
  write_json(dir / "plot_manifest.json", m);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian multi-resolution analysis of operator sequences"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with flag values");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Global g;
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  app.add_option("--out", g.out, "Output directory (default $RMRA_OUT, then ./rmra_out)");
  app.add_option("--routing", g.routing, "Operator path: auto, spd or spsd")
      ->check(CLI::IsMember({"auto", "spd", "spsd"}))
      ->capture_default_str();

  int rc = kExitOk;
  auto guard = [&rc](auto&& fn) { return [&rc, fn] { rc = fn(); }; };

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  c_gen->fallthrough();
  c_gen->add_option("kind", gen.kind, "toy-spd, toy-spsd, gyre, tori-common or tori-unique")
      ->required()
      ->check(CLI::IsMember({"toy-spd", "toy-spsd", "gyre", "tori-common", "tori-unique"}));
  c_gen->add_option("--n", gen.n, "Number of points")->check(CLI::PositiveNumber);
  c_gen->add_option("--t", gen.t, "Number of frames (gyre)")->check(CLI::PositiveNumber);
  c_gen->add_option("--dt", gen.dt, "Frame spacing (gyre, default 1/T)")->check(CLI::PositiveNumber);
  c_gen->add_option("--max-step", gen.max_step, "Largest integration step (gyre)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_gen->add_option("--integrator", gen.integrator, "rk4 or euler (gyre)")
      ->check(CLI::IsMember({"rk4", "euler"}))
      ->capture_default_str();
  c_gen->add_option("--r", gen.r, "Inner radius (tori)")->capture_default_str();
  c_gen->add_option("--R", gen.R, "Middle radius (tori)")->capture_default_str();
  c_gen->add_option("--Rt", gen.Rt, "Outer radius (tori)")->capture_default_str();
  c_gen->callback(guard([&] { return cmd_gen(gen, g); }));

  KernelOpts ker;
  auto* c_ker = app.add_subcommand("kernel", "Diffusion operators from point sets");
  c_ker->fallthrough();
  c_ker->add_option("inputs", ker.inputs, "Dataset file(s), a frame directory or a frame-column file")
      ->required();
  c_ker->add_option("--bandwidth-scale", ker.bandwidth_scale, "sigma = scale * median distance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_ker->add_option("--sigma", ker.sigma, "Fixed kernel scale (bypasses the median rule)")
      ->check(CLI::PositiveNumber);
  c_ker->add_option("--prefix", ker.prefix, "Only frame files starting with this prefix");
  c_ker->add_flag("--frame-column", ker.frame_column,
                  "Single input file whose first column is the 0-based frame index");
  c_ker->callback(guard([&] { return cmd_kernel(ker, g); }));

  ComposeOpts cmp;
  auto* c_cmp = app.add_subcommand("compose", "S and F for a pair of operators");
  c_cmp->fallthrough();
  c_cmp->add_option("W1", cmp.w1)->required()->check(CLI::ExistingFile);
  c_cmp->add_option("W2", cmp.w2)->required()->check(CLI::ExistingFile);
  c_cmp->add_option("--p", cmp.p, "Geodesic position in [0, 1]")->capture_default_str();
  c_cmp->add_option("--m", cmp.m, "Embedding dimension")->check(CLI::PositiveNumber)->capture_default_str();
  c_cmp->add_option("--selection", cmp.selection, "F eigenpairs: abs, value or signed")
      ->check(CLI::IsMember({"abs", "value", "signed"}))
      ->capture_default_str();
  c_cmp->add_option("--k", cmp.k, "Pairs per sign for --selection signed (default M/2)");
  c_cmp->add_option("--baseline", cmp.baseline, "dynamic-laplacian, hat-s or hat-a")
      ->check(CLI::IsMember({"dynamic-laplacian", "hat-s", "hat-a"}));
  c_cmp->add_option("--rank", cmp.rank, "Fixed rank on the SPSD path (0 = detect)");
  c_cmp->callback(guard([&] { return cmd_compose(cmp, g); }));

  TreeOpts tr;
  auto* c_tree = app.add_subcommand("tree", "Multi-resolution tree over a sequence");
  c_tree->fallthrough();
  c_tree->add_option("input", tr.input, "Operator directory (or point frames with --points)")
      ->required()
      ->check(CLI::ExistingPath);
  c_tree->add_option("--p", tr.p, "Geodesic position in [0, 1]")->capture_default_str();
  c_tree->add_option("--m", tr.m, "Embedding dimension per node")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_tree->add_option("--rank", tr.rank, "Fixed rank on the SPSD path (0 = detect)");
  c_tree->add_option("--prefix", tr.prefix, "Only files starting with this prefix");
  c_tree->add_flag("--points", tr.points, "Input frames are point sets; build kernels first");
  c_tree->add_option("--bandwidth-scale", tr.bandwidth_scale, "With --points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_tree->add_option("--sigma", tr.sigma, "With --points: fixed kernel scale")
      ->check(CLI::PositiveNumber);
  c_tree->add_flag("!--no-embeddings", tr.embeddings, "Skip per-node embedding files");
  c_tree->callback(guard([&] { return cmd_tree(tr, g); }));

  ClusterOpts cl;
  auto* c_cl = app.add_subcommand("cluster", "k-means on embedding columns");
  c_cl->fallthrough();
  c_cl->add_option("input", cl.input, "Embedding CSV or matrix file")
      ->required()
      ->check(CLI::ExistingFile);
  c_cl->add_option("--k", cl.k, "Number of clusters")->check(CLI::PositiveNumber)->capture_default_str();
  c_cl->add_option("--columns", cl.columns, "1-based columns to use (default all)")->delimiter(',');
  c_cl->callback(guard([&] { return cmd_cluster(cl, g); }));

  VerifyOpts ver;
  auto* c_ver = app.add_subcommand("verify", "Run the spectral oracles");
  c_ver->fallthrough();
  c_ver->add_option("--suite", ver.suite, "theorems, toy, forms, pseudo or all")
      ->check(CLI::IsMember({"theorems", "toy", "forms", "pseudo", "all"}))
      ->capture_default_str();
  c_ver->add_option("--seeds", ver.seeds, "Instances per oracle")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_ver->add_option("--n", ver.n, "Matrix size")->check(CLI::Range(2, 200))->capture_default_str();
  c_ver->callback(guard([&] { return cmd_verify(ver, g); }));

  PlotOpts pl;
  auto* c_pl = app.add_subcommand("plotdata", "Point coordinates colored by an eigenvector");
  c_pl->fallthrough();
  c_pl->add_option("input", pl.input, "Tree directory or embedding file")
      ->required()
      ->check(CLI::ExistingPath);
  c_pl->add_option("--coords", pl.coords, "Point sequence (tree) or point set (embedding)")
      ->required()
      ->check(CLI::ExistingPath);
  c_pl->add_option("--level", pl.level, "Tree level (default: root)");
  c_pl->add_option("--t", pl.t, "Node index within the level")->capture_default_str();
  c_pl->add_option("--operator", pl.op, "S or F")
      ->check(CLI::IsMember({"S", "F"}))
      ->capture_default_str();
  c_pl->add_option("--vector", pl.vector, "1-based eigenvector index")->capture_default_str();
  c_pl->add_option("--frames", pl.frames, "Number of equispaced frames")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_pl->add_option("--prefix", pl.prefix, "Only coordinate files starting with this prefix");
  c_pl->callback(guard([&] { return cmd_plotdata(pl, g); }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  } catch (const rmra::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const rmra::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return rc;
}
