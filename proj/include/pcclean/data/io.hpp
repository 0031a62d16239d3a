// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Point cloud files.
//
//   xyz        one "x y z [label]" line per point, whitespace separated
//   ply-ascii  ASCII PLY with a vertex element of x, y, z and an optional
//              uchar "outlier" property
//
// Values are written with 17 significant digits, so write/read round-trips
// are exact.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pcclean/geometry.hpp"

namespace pcclean {

enum class CloudFormat { Xyz, PlyAscii };

[[nodiscard]] inline CloudFormat parse_cloud_format(std::string_view s) {
  if (s == "xyz") return CloudFormat::Xyz;
  if (s == "ply" || s == "ply-ascii") return CloudFormat::PlyAscii;
  throw InvalidArgument("unknown cloud format '" + std::string(s) + "' (expected xyz or ply-ascii)");
}

/// Format implied by the file extension (.ply, anything else is xyz).
[[nodiscard]] inline CloudFormat format_from_path(std::string_view path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".ply" ? CloudFormat::PlyAscii : CloudFormat::Xyz;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_real(std::string_view tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw DataError(where + ": invalid number '" + std::string(tok) + "'");
  }
  return v;
}

inline std::uint8_t parse_label(std::string_view tok, const std::string& where) {
  if (tok == "0") return 0;
  if (tok == "1") return 1;
  throw DataError(where + ": outlier label must be 0 or 1, got '" + std::string(tok) + "'");
}

inline void append_real(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace detail

[[nodiscard]] inline PointCloud parse_xyz(std::istream& in, const std::string& name = "xyz") {
  PointCloud cloud;
  std::vector<std::uint8_t> labels;
  int columns = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    const std::string where = name + ": line " + std::to_string(lineno);
    if (toks.size() != 3 && toks.size() != 4) {
      throw DataError(where + ": expected 3 or 4 fields, got " + std::to_string(toks.size()));
    }
    const int c = static_cast<int>(toks.size());
    if (columns == 0) columns = c;
    if (c != columns) {
      throw DataError(where + ": expected " + std::to_string(columns) + " fields like earlier lines, got " +
                      std::to_string(c));
    }
    cloud.points.push_back({detail::parse_real(toks[0], where), detail::parse_real(toks[1], where),
                            detail::parse_real(toks[2], where)});
    if (c == 4) labels.push_back(detail::parse_label(toks[3], where));
  }
  if (columns == 4) cloud.labels = std::move(labels);
  return cloud;
}

[[nodiscard]] inline PointCloud parse_ply(std::istream& in, const std::string& name = "ply") {
  std::string line;
  std::size_t lineno = 0;
  auto where = [&] { return name + ": line " + std::to_string(lineno); };
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line != "ply") throw DataError(name + ": line 1: missing 'ply' magic");
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool seen_vertex = false;
  bool seen_format = false;
  std::vector<std::string> props;
  for (;;) {
    if (!next()) throw DataError(name + ": header not terminated by end_header");
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "end_header") break;
    if (toks[0] == "comment" || toks[0] == "obj_info") continue;
    if (toks[0] == "format") {
      if (toks.size() != 3 || toks[1] != "ascii") throw DataError(where() + ": only 'format ascii 1.0' is supported");
      seen_format = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) throw DataError(where() + ": malformed element line");
      in_vertex = toks[1] == "vertex";
      if (in_vertex) {
        seen_vertex = true;
        vertex_count = static_cast<std::size_t>(detail::parse_real(toks[2], where()));
      } else if (detail::parse_real(toks[2], where()) != 0.0) {
        throw DataError(where() + ": unsupported element '" + std::string(toks[1]) + "'");
      }
    } else if (toks[0] == "property") {
      if (toks.size() != 3) throw DataError(where() + ": malformed or list property");
      if (in_vertex) props.emplace_back(toks[2]);
    } else {
      throw DataError(where() + ": unexpected header keyword '" + std::string(toks[0]) + "'");
    }
  }
  if (!seen_format) throw DataError(name + ": header has no format line");
  if (!seen_vertex) throw DataError(name + ": header has no vertex element");
  auto find = [&](const char* p) -> long {
    for (std::size_t i = 0; i < props.size(); ++i)
      if (props[i] == p) return static_cast<long>(i);
    return -1;
  };
  const long ix = find("x"), iy = find("y"), iz = find("z"), io = find("outlier");
  if (ix < 0 || iy < 0 || iz < 0) throw DataError(name + ": vertex element lacks x, y or z");

  PointCloud cloud;
  std::vector<std::uint8_t> labels;
  cloud.points.reserve(vertex_count);
  while (cloud.points.size() < vertex_count) {
    if (!next()) {
      throw DataError(name + ": expected " + std::to_string(vertex_count) + " vertices, file ends after " +
                      std::to_string(cloud.points.size()));
    }
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != props.size()) {
      throw DataError(where() + ": expected " + std::to_string(props.size()) + " values, got " +
                      std::to_string(toks.size()));
    }
    const std::string w = where();
    cloud.points.push_back({detail::parse_real(toks[static_cast<std::size_t>(ix)], w),
                            detail::parse_real(toks[static_cast<std::size_t>(iy)], w),
                            detail::parse_real(toks[static_cast<std::size_t>(iz)], w)});
    if (io >= 0) labels.push_back(detail::parse_label(toks[static_cast<std::size_t>(io)], w));
  }
  if (io >= 0) cloud.labels = std::move(labels);
  return cloud;
}

[[nodiscard]] inline std::string format_cloud(const PointCloud& cloud, CloudFormat format) {
  cloud.validate();
  std::string out;
  const bool labeled = cloud.labels.has_value();
  if (format == CloudFormat::PlyAscii) {
    out += "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
           "\nproperty double x\nproperty double y\nproperty double z\n";
    if (labeled) out += "property uchar outlier\n";
    out += "end_header\n";
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    detail::append_real(out, p.x);
    out += ' ';
    detail::append_real(out, p.y);
    out += ' ';
    detail::append_real(out, p.z);
    if (labeled) out += (*cloud.labels)[i] ? " 1" : " 0";
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline PointCloud read_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open point cloud file: " + path);
  return format == CloudFormat::PlyAscii ? parse_ply(in, path) : parse_xyz(in, path);
}

[[nodiscard]] inline PointCloud read_cloud(const std::string& path) { return read_cloud(path, format_from_path(path)); }

inline void write_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
  const std::string text = format_cloud(cloud, format);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open point cloud file for writing: " + path);
  out << text;
  if (!out) throw DataError("failed writing point cloud file: " + path);
}

inline void write_cloud(const PointCloud& cloud, const std::string& path) {
  write_cloud(cloud, path, format_from_path(path));
}

}  // namespace pcclean
