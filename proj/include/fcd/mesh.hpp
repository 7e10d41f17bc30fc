#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fcd/errors.hpp"
#include "fcd/point_cloud.hpp"

namespace fcd {

using Vec3 = Point<3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Indexed triangle mesh. Construction validates indices and rejects
/// zero-area triangles.
class TriangleMesh {
 public:
  using Triangle = std::array<std::uint32_t, 3>;

  TriangleMesh() = default;

  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      if (!is_finite(vertices_[i]))
        throw InvalidInput("mesh vertex " + std::to_string(i) + " is not finite");
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      for (auto v : triangles_[t])
        if (v >= vertices_.size())
          throw InvalidInput("triangle " + std::to_string(t) + " references vertex " +
                             std::to_string(v) + " out of range");
      const auto& [a, b, c] = corners(t);
      if (!(norm(cross(b - a, c - a)) > 0.0))
        throw InvalidInput("triangle " + std::to_string(t) + " is degenerate");
    }
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  bool empty() const { return triangles_.empty(); }

  std::array<Vec3, 3> corners(std::size_t t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
};

/// Closest point on triangle abc to p, by Voronoi-region classification
/// (vertex, edge, or face interior).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = 1.0 / (va + vb + vc);
  return a + (vb * denom) * ab + (vc * denom) * ac;
}

inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  return distance(p, closest_point_on_triangle(p, a, b, c));
}

/// Distance from p to the nearest triangle of the mesh (linear scan).
inline double point_mesh_distance(const Vec3& p, const TriangleMesh& mesh) {
  if (mesh.empty()) throw InvalidInput("mesh has no triangles");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto& [a, b, c] = mesh.corners(t);
    best = std::min(best, point_triangle_distance(p, a, b, c));
  }
  return best;
}

}  // namespace fcd
