#pragma once

// Lloyd's k-means with k-means++ seeding.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "rmra/linalg.hpp"
#include "rmra/random.hpp"

namespace rmra {

struct KMeansConfig {
  int k = 2;
  std::uint64_t seed = 0;
  int max_iterations = 300;
  double tol = 1e-8;  // stop once no center moves farther than this
};

struct KMeansResult {
  std::vector<int> labels;  // relabelled in order of first appearance
  Matrix centers;           // k x d, row c belongs to label c
  int iterations = 0;
  bool converged = false;
  double inertia = 0.0;
};

inline Index count_distinct_rows(const Matrix& x) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index c = 0; c < x.cols(); ++c) rows[static_cast<std::size_t>(i)].push_back(x(i, c));
  }
  std::sort(rows.begin(), rows.end());
  return static_cast<Index>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

namespace detail {

inline int nearest(const Matrix& centers, const Eigen::RowVectorXd& p, double* dist = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centers.rows(); ++c) {
    const double d = (centers.row(c) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace detail

inline KMeansResult kmeans(const Matrix& x, const KMeansConfig& cfg) {
  const Index n = x.rows();
  if (cfg.k < 1) throw ValidationError("kmeans: k must be at least 1");
  if (n == 0 || x.cols() == 0) throw ValidationError("kmeans: empty input");
  detail::require_finite(x, "kmeans");
  const Index distinct = count_distinct_rows(x);
  if (cfg.k > distinct) {
    throw ValidationError("kmeans: k=" + std::to_string(cfg.k) + " exceeds the " +
                          std::to_string(distinct) + " distinct points");
  }

  Rng rng(cfg.seed);
  Matrix centers(cfg.k, x.cols());
  centers.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector d2(n);
  for (int c = 1; c < cfg.k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      detail::nearest(centers.topRows(c), x.row(i), &d2[i]);
      total += d2[i];
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    Index pick = -1;
    for (Index i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      acc += d2[i];
      if (acc > target) break;
    }
    centers.row(c) = x.row(pick);
  }

  KMeansResult out;
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (out.iterations = 1; out.iterations <= cfg.max_iterations; ++out.iterations) {
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = detail::nearest(centers, x.row(i));
    Matrix next = Matrix::Zero(cfg.k, x.cols());
    std::vector<Index> count(static_cast<std::size_t>(cfg.k), 0);
    for (Index i = 0; i < n; ++i) {
      next.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++count[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < cfg.k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it to the point farthest from its center.
      Index far = 0;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double d = (centers.row(labels[static_cast<std::size_t>(i)]) - x.row(i)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      next.row(c) = x.row(far);
    }
    const double shift = (next - centers).rowwise().norm().maxCoeff();
    centers = std::move(next);
    if (shift <= cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.iterations = std::min(out.iterations, cfg.max_iterations);
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = detail::nearest(centers, x.row(i));

  std::vector<int> remap(static_cast<std::size_t>(cfg.k), -1);
  int next_label = 0;
  for (int& l : labels) {
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next_label++;
    l = remap[static_cast<std::size_t>(l)];
  }
  out.centers = Matrix::Zero(cfg.k, x.cols());
  for (int c = 0; c < cfg.k; ++c) {
    const int to = remap[static_cast<std::size_t>(c)] >= 0 ? remap[static_cast<std::size_t>(c)] : next_label++;
    out.centers.row(to) = centers.row(c);
  }
  for (Index i = 0; i < n; ++i) {
    out.inertia += (out.centers.row(labels[static_cast<std::size_t>(i)]) - x.row(i)).squaredNorm();
  }
  out.labels = std::move(labels);
  return out;
}

}  // namespace rmra
