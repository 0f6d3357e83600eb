#pragma once

// Plain-text matrix serialization. Values are written in shortest
// round-trip form, so write-then-read reproduces every double bit-exactly.

#include <deepdict/types.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace deepdict::io {

inline std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw DataError("cannot format value");
  return std::string(buf, end);
}

inline bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && end == token.data() + token.size();
}

inline bool parse_int(std::string_view token, long long& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && end == token.data() + token.size();
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  if (sep == ' ') {
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t\r", pos);
      if (start == std::string_view::npos) break;
      auto stop = line.find_first_of(" \t\r", start);
      if (stop == std::string_view::npos) stop = line.size();
      fields.push_back(line.substr(start, stop - start));
      pos = stop;
    }
    return fields;
  }
  std::size_t start = 0;
  while (true) {
    const auto stop = line.find(sep, start);
    fields.push_back(trim(line.substr(start, stop == std::string_view::npos ? std::string_view::npos
                                                                             : stop - start)));
    if (stop == std::string_view::npos) break;
    start = stop + 1;
  }
  return fields;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

/// Reads a whitespace-separated matrix, one matrix row per line. Blank lines
/// and lines starting with '#' are skipped.
inline Matrix read_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<double> values;
  Index rows = 0;
  Index cols = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = split_fields(body, ' ');
    if (cols < 0) cols = static_cast<Index>(fields.size());
    if (static_cast<Index>(fields.size()) != cols)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": row has " +
                      std::to_string(fields.size()) + " fields, expected " + std::to_string(cols));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v))
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed value '" +
                        std::string(fields[j]) + "'");
      if (!std::isfinite(v))
        throw DataError("non-finite value at (" + std::to_string(rows) + "," + std::to_string(j) +
                        ")");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) return Matrix(0, 0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

inline void write_matrix(std::ostream& out, const Matrix& m, char sep = ' ') {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << sep;
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m, char sep = ' ') {
  auto out = open_output(path);
  write_matrix(out, m, sep);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

} // namespace deepdict::io
