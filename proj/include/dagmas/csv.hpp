#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dagmas/graph.hpp"
#include "dagmas/solver.hpp"

namespace dagmas {

// I/O and format failures (missing files, malformed rows, shape mismatches
// discovered while reading). Distinct from numerical_error so the CLI can
// map the two onto different exit codes.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// general format with 17 significant digits (round-trip safe)
inline std::string fmt17(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// shortest representation that still round-trips
inline std::string fmt_auto(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view tok, const std::string& where) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw data_error(where + ": cannot parse number '" + std::string(tok) + "'");
  }
  return v;
}

inline long parse_long(std::string_view tok, const std::string& where) {
  long v = 0;
  const char* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw data_error(where + ": cannot parse integer '" + std::string(tok) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open for writing: " + path.string());
  return out;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open for reading: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

/// Sparse triplet serialization: header `i,j,weight`, one row per nonzero in
/// row-major order, 0-based indices, 17 significant digits.
inline void write_triplets(const std::filesystem::path& path, const Matrix& W) {
  auto out = detail::open_out(path);
  out << "i,j,weight\n";
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      if (W(i, j) != 0.0) {
        out << i << ',' << j << ',' << detail::fmt17(W(i, j)) << '\n';
      }
    }
  }
  if (!out) throw data_error("write failed: " + path.string());
}

/// Reads a triplet file back into a dense d x d matrix. With d < 0 the
/// dimension is inferred as max index + 1.
inline Matrix read_triplets(const std::filesystem::path& path, Eigen::Index d = -1) {
  const auto lines = detail::read_lines(path);
  const std::string where = path.string();
  if (lines.empty() || lines.front() != "i,j,weight") {
    throw data_error(where + ": expected 'i,j,weight' header");
  }
  struct Entry {
    long i, j;
    double w;
  };
  std::vector<Entry> entries;
  entries.reserve(lines.size() - 1);
  long max_index = -1;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto tok = detail::split_commas(lines[r]);
    if (tok.size() != 3) throw data_error(where + ": expected 3 fields per row");
    Entry e;
    e.i = detail::parse_long(tok[0], where);
    e.j = detail::parse_long(tok[1], where);
    e.w = detail::parse_double(tok[2], where);
    if (e.i < 0 || e.j < 0) throw data_error(where + ": negative index");
    max_index = std::max({max_index, e.i, e.j});
    entries.push_back(e);
  }
  if (d < 0) d = max_index + 1;
  if (d < 1) throw data_error(where + ": empty triplet file with no dimension given");
  if (max_index >= d) throw data_error(where + ": index out of range for dimension " + std::to_string(d));
  Matrix W = Matrix::Zero(d, d);
  for (const Entry& e : entries) W(e.i, e.j) = e.w;
  return W;
}

/// Dense matrix serialization: one row per line, comma-separated, 17
/// significant digits, no header.
inline void write_matrix(const std::filesystem::path& path, const Matrix& X) {
  auto out = detail::open_out(path);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j > 0) out << ',';
      out << detail::fmt17(X(i, j));
    }
    out << '\n';
  }
  if (!out) throw data_error("write failed: " + path.string());
}

inline Matrix read_matrix(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  const std::string where = path.string();
  if (lines.empty()) throw data_error(where + ": empty matrix file");
  const Eigen::Index rows = static_cast<Eigen::Index>(lines.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(detail::split_commas(lines[0]).size());
  Matrix X(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto tok = detail::split_commas(lines[static_cast<std::size_t>(i)]);
    if (static_cast<Eigen::Index>(tok.size()) != cols) {
      throw data_error(where + ": ragged row " + std::to_string(i));
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      X(i, j) = detail::parse_double(tok[static_cast<std::size_t>(j)], where);
    }
  }
  return X;
}

inline void write_trace(const std::filesystem::path& path, const std::vector<Snapshot>& history) {
  auto out = detail::open_out(path);
  out << "iteration,wall_time_s,objective,acyclic\n";
  for (const Snapshot& s : history) {
    out << s.iteration << ',' << detail::fmt_auto(s.wall_time) << ',' << detail::fmt_auto(s.objective)
        << ',' << (s.acyclic ? 1 : 0) << '\n';
  }
  if (!out) throw data_error("write failed: " + path.string());
}

}  // namespace dagmas
