#pragma once

// Repo-wide matrix file formats.
//
// Binary (.rmra), all integers and floats little-endian:
//   bytes 0..3   magic "RMRA"
//   bytes 4..5   format version (u16, currently 1)
//   bytes 6..9   rows (u32)
//   bytes 10..13 cols (u32)
//   then rows*cols IEEE-754 binary64 values, row-major.
//
// CSV: comma-separated, one matrix row per line. Blank lines and lines
// starting with # are skipped on read.

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rmra/linalg.hpp"

namespace rmra::io {

inline constexpr std::array<char, 4> kMagic{'R', 'M', 'R', 'A'};
inline constexpr std::uint16_t kFormatVersion = 1;

namespace detail {

template <class UInt>
void put_le(std::ostream& os, UInt v) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  }
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <class UInt>
UInt get_le(std::istream& is, const char* what) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!is) throw ValidationError(std::string("matrix file truncated while reading ") + what);
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline void write_binary(std::ostream& os, const Matrix& m) {
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
    throw ValidationError("matrix too large for the binary format");
  }
  os.write(kMagic.data(), kMagic.size());
  detail::put_le<std::uint16_t>(os, kFormatVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      detail::put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(m(r, c)));
    }
  }
}

inline Matrix read_binary(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw ValidationError("not an RMRA matrix file (bad magic)");
  const auto version = detail::get_le<std::uint16_t>(is, "version");
  if (version != kFormatVersion) {
    throw ValidationError("unsupported RMRA format version " + std::to_string(version));
  }
  const auto rows = detail::get_le<std::uint32_t>(is, "rows");
  const auto cols = detail::get_le<std::uint32_t>(is, "cols");
  Matrix m(rows, cols);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      m(r, c) = std::bit_cast<double>(detail::get_le<std::uint64_t>(is, "payload"));
    }
  }
  return m;
}

inline void write_binary(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
  write_binary(os, m);
  if (!os) throw ValidationError("failed writing " + path.string());
}

inline Matrix read_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  try {
    return read_binary(is);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

/// 17 significant digits: round-trips every double exactly.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

inline void write_csv(std::ostream& os, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
  write_csv(os, m);
}

namespace detail {

inline std::vector<double> parse_csv_row(const std::string& line, std::size_t lineno) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw ValidationError("CSV line " + std::to_string(lineno) + ": cannot parse '" + cell +
                            "' as a number");
    }
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (used != cell.size()) {
      throw ValidationError("CSV line " + std::to_string(lineno) + ": trailing text in '" +
                            cell + "'");
    }
    row.push_back(v);
  }
  return row;
}

}  // namespace detail

inline Matrix read_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    rows.push_back(detail::parse_csv_row(line, lineno));
    if (rows.back().size() != rows.front().size()) {
      throw ValidationError("CSV line " + std::to_string(lineno) + ": expected " +
                            std::to_string(rows.front().size()) + " columns, got " +
                            std::to_string(rows.back().size()));
    }
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return m;
}

inline Matrix read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  try {
    return read_csv(is);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

/// Dispatch on extension: ".csv" is text, anything else is the binary format.
inline Matrix read_matrix(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? read_csv(path) : read_binary(path);
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  if (path.extension() == ".csv") {
    write_csv(path, m);
  } else {
    write_binary(path, m);
  }
}

}  // namespace rmra::io
