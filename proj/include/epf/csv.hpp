#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "epf/error.hpp"

namespace epf::csv {

/// Splits one CSV line on commas. Quoting is not supported; none of the
/// formats read here need it.
inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// A parsed CSV file: header columns plus data rows with their 1-based line numbers.
struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  [[nodiscard]] std::string where(std::size_t row) const {
    return path + ":" + std::to_string(line_numbers[row]);
  }
};

/// Reads a CSV file and checks the header matches `expected` exactly.
/// An empty file yields an empty table. Blank lines are skipped.
inline Table read(const std::string& path, const std::vector<std::string>& expected) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  Table t;
  t.path = path;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty()) continue;
    auto fields = split(view);
    std::vector<std::string> cells;
    cells.reserve(fields.size());
    for (auto f : fields) cells.emplace_back(trim(f));
    if (!have_header) {
      if (cells != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw InputError(path + ": expected header '" + want + "'");
      }
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != expected.size())
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(expected.size()) + " fields, got " +
                       std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  return t;
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
    throw InputError(where + ": invalid number '" + std::string(s) + "'");
  return v;
}

inline long parse_int(std::string_view s, const std::string& where) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw InputError(where + ": invalid integer '" + std::string(s) + "'");
  return v;
}

/// Fixed 17-significant-digit rendering; round-trips every finite double.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace epf::csv
