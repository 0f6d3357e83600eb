#pragma once

// `key = value` text files, used for run configs and model metadata.

#include <deepdict/matrix_io.hpp>
#include <deepdict/types.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace deepdict::kv {

using Entries = std::vector<std::pair<std::string, std::string>>;

inline std::map<std::string, std::string> read(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = io::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    const auto key = io::trim(body.substr(0, eq));
    if (key.empty()) throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    values[std::string(key)] = std::string(io::trim(body.substr(eq + 1)));
  }
  return values;
}

inline void write(const std::filesystem::path& path, const Entries& entries) {
  auto out = io::open_output(path);
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

template <typename T, typename Format>
std::string join(const std::vector<T>& values, Format format) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format(values[i]);
  }
  return s;
}

inline std::string join_doubles(const std::vector<double>& values) {
  return join(values, [](double v) { return io::format_double(v); });
}

inline std::string join_ints(const std::vector<Index>& values) {
  return join(values, [](Index v) { return std::to_string(v); });
}

inline std::vector<std::string_view> list_fields(std::string_view text) {
  if (io::trim(text).empty()) return {};
  return io::split_fields(text, ',');
}

inline double parse_double(const std::string& key, std::string_view text) {
  double v = 0.0;
  if (!io::parse_double(io::trim(text), v)) throw DataError(key + ": '" + std::string(text) + "' is not a number");
  return v;
}

inline long long parse_int(const std::string& key, std::string_view text) {
  long long v = 0;
  if (!io::parse_int(io::trim(text), v)) throw DataError(key + ": '" + std::string(text) + "' is not an integer");
  return v;
}

inline std::vector<double> parse_doubles(const std::string& key, std::string_view text) {
  std::vector<double> values;
  for (auto f : list_fields(text)) values.push_back(parse_double(key, f));
  return values;
}

inline std::vector<Index> parse_ints(const std::string& key, std::string_view text) {
  std::vector<Index> values;
  for (auto f : list_fields(text)) values.push_back(static_cast<Index>(parse_int(key, f)));
  return values;
}

inline bool parse_bool(const std::string& key, std::string_view text) {
  const auto t = io::trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw DataError(key + ": '" + std::string(text) + "' is not a boolean");
}

inline const std::string& at(const std::map<std::string, std::string>& values, const std::string& key) {
  auto it = values.find(key);
  if (it == values.end()) throw DataError("missing key '" + key + "'");
  return it->second;
}

} // namespace deepdict::kv
