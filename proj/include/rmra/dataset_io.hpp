#pragma once

// Point clouds and frame sequences on disk.
//
// A dataset is one matrix file (binary or CSV), one point per row.
// A sequence is either a directory of per-frame files, taken in lexicographic
// filename order, or a single matrix whose first column is the 0-based frame
// index followed by the point coordinates; within a frame, rows keep point
// order and every frame must hold the same number of points.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "rmra/diffusion.hpp"
#include "rmra/matrix_io.hpp"

namespace rmra::io {

inline Dataset read_dataset(const std::filesystem::path& path) {
  return Dataset(read_matrix(path));
}

inline bool is_matrix_file(const std::filesystem::path& p) {
  return p.extension() == ".rmra" || p.extension() == ".csv";
}

/// Matrix files in `dir` whose name starts with `prefix`, sorted by name.
inline std::vector<std::filesystem::path> list_matrix_files(const std::filesystem::path& dir,
                                                            const std::string& prefix = "") {
  if (!std::filesystem::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file() || !is_matrix_file(e.path())) continue;
    if (e.path().filename().string().rfind(prefix, 0) != 0) continue;
    out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Matrix> read_frame_column_file(const std::filesystem::path& path) {
  const Matrix m = read_matrix(path);
  if (m.cols() < 2) throw ValidationError(path.string() + ": need a frame column and coordinates");
  std::vector<Matrix> frames;
  std::vector<std::vector<Index>> rows;
  for (Index i = 0; i < m.rows(); ++i) {
    const double f = m(i, 0);
    if (!(f >= 0.0) || f != std::floor(f)) {
      throw ValidationError(path.string() + ": row " + std::to_string(i + 1) +
                            " has an invalid frame index");
    }
    const auto k = static_cast<std::size_t>(f);
    if (k >= rows.size()) rows.resize(k + 1);
    rows[k].push_back(i);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != rows.front().size() || rows[k].empty()) {
      throw ValidationError(path.string() + ": frame " + std::to_string(k) +
                            " has a different point count");
    }
    Matrix f(static_cast<Index>(rows[k].size()), m.cols() - 1);
    for (std::size_t r = 0; r < rows[k].size(); ++r) {
      f.row(static_cast<Index>(r)) = m.row(rows[k][r]).tail(m.cols() - 1);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

/// Frames of a sequence, from a directory or a frame-column file.
inline std::vector<Matrix> read_sequence(const std::filesystem::path& path,
                                         const std::string& prefix = "") {
  if (!std::filesystem::is_directory(path)) return read_frame_column_file(path);
  std::vector<Matrix> frames;
  for (const auto& f : list_matrix_files(path, prefix)) frames.push_back(read_matrix(f));
  if (frames.empty()) throw ValidationError("no frame files in " + path.string());
  for (const auto& f : frames) {
    if (f.rows() != frames.front().rows() || f.cols() != frames.front().cols()) {
      throw ValidationError(path.string() + ": frames differ in shape");
    }
  }
  return frames;
}

/// Zero-padded 1-based frame file name, e.g. frame_0001.rmra.
inline std::string frame_name(const std::string& stem, Index k, const std::string& ext = ".rmra") {
  std::string digits = std::to_string(k);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return stem + "_" + digits + ext;
}

}  // namespace rmra::io
