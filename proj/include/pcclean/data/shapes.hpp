// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Analytic surfaces used for synthetic training and test clouds. Each shape
// samples points uniformly by surface area and reports exact point-to-surface
// distances.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pcclean/geometry.hpp"
#include "pcclean/rng.hpp"

namespace pcclean {

enum class ShapeKind { Icosahedron, Sphere, Cube, Torus };

[[nodiscard]] inline std::string to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::Icosahedron: return "icosahedron";
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Cube: return "cube";
    case ShapeKind::Torus: return "torus";
  }
  return "unknown";
}

[[nodiscard]] inline ShapeKind parse_shape(std::string_view s) {
  if (s == "icosahedron") return ShapeKind::Icosahedron;
  if (s == "sphere") return ShapeKind::Sphere;
  if (s == "cube") return ShapeKind::Cube;
  if (s == "torus") return ShapeKind::Torus;
  throw InvalidArgument("unknown shape kind '" + std::string(s) + "' (expected icosahedron, sphere, cube or torus)");
}

struct Triangle {
  Point3 a, b, c;
  [[nodiscard]] double area() const { return 0.5 * norm(cross(b - a, c - a)); }
};

/// Closest point on a triangle (Ericson, Real-Time Collision Detection 5.1.5).
[[nodiscard]] inline Point3 closest_point_on_triangle(Point3 p, const Triangle& t) {
  const Point3 ab = t.b - t.a;
  const Point3 ac = t.c - t.a;
  const Point3 ap = p - t.a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return t.a;
  const Point3 bp = p - t.b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return t.b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return t.a + ab * (d1 / (d1 - d3));
  const Point3 cp = p - t.c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return t.c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return t.a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return t.b + (t.c - t.b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return t.a + ab * (vb * denom) + ac * (vc * denom);
}

[[nodiscard]] inline double point_triangle_distance(Point3 p, const Triangle& t) {
  return norm(p - closest_point_on_triangle(p, t));
}

/// The 20 faces of the regular icosahedron with circumradius 1.
[[nodiscard]] inline const std::vector<Triangle>& icosahedron_faces() {
  static const std::vector<Triangle> faces = [] {
    const double phi = std::numbers::phi;
    std::vector<Point3> v;
    for (double s1 : {-1.0, 1.0}) {
      for (double s2 : {-1.0, 1.0}) {
        v.push_back({0.0, s1, s2 * phi});
        v.push_back({s1, s2 * phi, 0.0});
        v.push_back({s2 * phi, 0.0, s1});
      }
    }
    const double r = std::sqrt(1.0 + phi * phi);
    for (Point3& p : v) p = p / r;
    const double edge2 = 4.0 / (r * r);  // squared edge length (edge 2 before scaling)
    auto adjacent = [&](const Point3& a, const Point3& b) { return std::abs(squared_distance(a, b) - edge2) < 1e-9; };
    std::vector<Triangle> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        for (std::size_t k = j + 1; k < v.size(); ++k)
          if (adjacent(v[i], v[j]) && adjacent(v[j], v[k]) && adjacent(v[i], v[k])) out.push_back({v[i], v[j], v[k]});
    return out;
  }();
  return faces;
}

class Shape {
 public:
  static constexpr double kTorusMajor = 1.0;
  static constexpr double kTorusMinor = 0.35;

  explicit Shape(ShapeKind kind) : kind_(kind) {}

  [[nodiscard]] ShapeKind kind() const { return kind_; }

  /// `n` area-uniform surface samples; deterministic per seed.
  [[nodiscard]] PointCloud sample(std::size_t n, std::uint64_t seed) const {
    if (n < 1) throw InvalidArgument("generate_shape: n_points must be at least 1");
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(kind_) + 0x5A9E);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Point3> pts;
    pts.reserve(n);
    switch (kind_) {
      case ShapeKind::Sphere:
        while (pts.size() < n) {
          const Point3 g{gauss(rng), gauss(rng), gauss(rng)};
          const double len = norm(g);
          if (len < 1e-12) continue;
          pts.push_back(g / len);
        }
        break;
      case ShapeKind::Cube: {
        std::uniform_int_distribution<int> face(0, 5);
        std::uniform_real_distribution<double> u11(-1.0, 1.0);
        while (pts.size() < n) {
          const int f = face(rng);
          Point3 p{u11(rng), u11(rng), u11(rng)};
          p[static_cast<std::size_t>(f / 2)] = (f % 2 == 0) ? -1.0 : 1.0;
          pts.push_back(p);
        }
        break;
      }
      case ShapeKind::Torus: {
        const double two_pi = 2.0 * std::numbers::pi;
        while (pts.size() < n) {
          const double a = two_pi * u01(rng);
          const double b = two_pi * u01(rng);
          // area element is proportional to (R + r cos b)
          if (u01(rng) * (kTorusMajor + kTorusMinor) > kTorusMajor + kTorusMinor * std::cos(b)) continue;
          const double rho = kTorusMajor + kTorusMinor * std::cos(b);
          pts.push_back({rho * std::cos(a), rho * std::sin(a), kTorusMinor * std::sin(b)});
        }
        break;
      }
      case ShapeKind::Icosahedron: {
        const auto& faces = icosahedron_faces();
        std::vector<double> areas;
        for (const Triangle& t : faces) areas.push_back(t.area());
        std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
        while (pts.size() < n) {
          const Triangle& t = faces[pick(rng)];
          const double s = std::sqrt(u01(rng));
          const double r2 = u01(rng);
          pts.push_back(t.a * (1.0 - s) + t.b * (s * (1.0 - r2)) + t.c * (s * r2));
        }
        break;
      }
    }
    return PointCloud(std::move(pts));
  }

  /// Exact unsigned distance from p to the surface.
  [[nodiscard]] double surface_distance(Point3 p) const {
    switch (kind_) {
      case ShapeKind::Sphere: return std::abs(norm(p) - 1.0);
      case ShapeKind::Cube: {
        const Point3 q{std::abs(p.x), std::abs(p.y), std::abs(p.z)};
        const Point3 outside{std::max(q.x - 1.0, 0.0), std::max(q.y - 1.0, 0.0), std::max(q.z - 1.0, 0.0)};
        const double out = norm(outside);
        if (out > 0.0) return out;
        return 1.0 - std::max({q.x, q.y, q.z});
      }
      case ShapeKind::Torus: {
        const double rho = std::hypot(p.x, p.y);
        return std::abs(std::hypot(rho - kTorusMajor, p.z) - kTorusMinor);
      }
      case ShapeKind::Icosahedron: {
        double best = std::numeric_limits<double>::infinity();
        for (const Triangle& t : icosahedron_faces()) best = std::min(best, point_triangle_distance(p, t));
        return best;
      }
    }
    return 0.0;
  }

 private:
  ShapeKind kind_;
};

[[nodiscard]] inline PointCloud generate_shape(ShapeKind kind, std::size_t n_points, std::uint64_t seed) {
  return Shape(kind).sample(n_points, seed);
}

}  // namespace pcclean
