#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relid/errors.hpp"
#include "relid/series.hpp"

namespace relid {

/// A loaded sample stream plus the sampling period inferred from the median
/// spacing of its timestamps (0 when fewer than two samples).
struct Series {
  std::vector<Sample> samples;
  double dt = 0.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

inline double parse_number(std::string_view field, const std::string& path, std::size_t lineno) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(path + ":" + std::to_string(lineno) + ": cannot parse number '" +
                     std::string(field) + "'");
  }
  return value;
}

/// Fixed 9-decimal formatting keeps traces byte-stable across runs and
/// round-trippable to 1e-9.
inline void append_number(std::string& out, double v) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof(buf), "%.9f", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace detail

/// Reads a (t, u, y) sample stream. The header must start with the t,u,y
/// columns; extra columns (as in trace files) are ignored, so a previous
/// run's trace replays directly. Timestamps must be strictly increasing.
inline Series load_series(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file, expected a t,u,y header");
  auto header = detail::split_fields(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "u" || header[2] != "y") {
    throw ParseError(path + ":1: header must start with t,u,y");
  }

  Series series;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() < 3) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected at least 3 columns");
    }
    Sample s;
    s.t = detail::parse_number(fields[0], path, lineno);
    s.u = detail::parse_number(fields[1], path, lineno);
    s.y = detail::parse_number(fields[2], path, lineno);
    if (!series.samples.empty() && !(s.t > series.samples.back().t)) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": timestamps must be strictly increasing");
    }
    series.samples.push_back(s);
  }

  if (series.samples.size() >= 2) {
    std::vector<double> gaps;
    gaps.reserve(series.samples.size() - 1);
    for (std::size_t i = 1; i < series.samples.size(); ++i) {
      gaps.push_back(series.samples[i].t - series.samples[i - 1].t);
    }
    const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    series.dt = *mid;
  }
  return series;
}

inline void write_series(const std::string& path, std::span<const Sample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open data file for writing: " + path);
  std::string buf = "t,u,y\n";
  for (const Sample& s : samples) {
    detail::append_number(buf, s.t);
    buf.push_back(',');
    detail::append_number(buf, s.u);
    buf.push_back(',');
    detail::append_number(buf, s.y);
    buf.push_back('\n');
  }
  out << buf;
}

inline void write_trace(const std::string& path, std::span<const TraceRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open trace file for writing: " + path);
  std::string buf = "t,u,y,y_hat,e\n";
  for (const TraceRow& r : rows) {
    detail::append_number(buf, r.t);
    buf.push_back(',');
    detail::append_number(buf, r.u);
    buf.push_back(',');
    detail::append_number(buf, r.y);
    buf.push_back(',');
    detail::append_number(buf, r.y_hat);
    buf.push_back(',');
    detail::append_number(buf, r.e);
    buf.push_back('\n');
  }
  out << buf;
}

}  // namespace relid
