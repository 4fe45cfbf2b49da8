#include "liftgame/geometry.hpp"

#include <Eigen/LU>

#include <cmath>

namespace liftgame {

std::vector<Eigen::Vector2d> regular_polygon(int sides, double circumradius, double phase) {
  if (sides < 3) throw ConfigError("regular_polygon: need at least 3 sides");
  std::vector<Eigen::Vector2d> v(sides);
  for (int k = 0; k < sides; ++k) {
    const double a = phase + 2.0 * M_PI * k / sides;
    v[k] = circumradius * Eigen::Vector2d(std::cos(a), std::sin(a));
  }
  return v;
}

HalfspaceSet polygon_halfspaces(const std::vector<Eigen::Vector2d>& vertices) {
  const int k = static_cast<int>(vertices.size());
  if (k < 3) throw ConfigError("polygon_halfspaces: need at least 3 vertices");
  HalfspaceSet out;
  out.normals.resize(k, 2);
  out.offsets.resize(k);
  for (int i = 0; i < k; ++i) {
    const Eigen::Vector2d& a = vertices[i];
    const Eigen::Vector2d& b = vertices[(i + 1) % k];
    const Eigen::Vector2d edge = b - a;
    const double len = edge.norm();
    if (len < 1e-12) throw ConfigError("polygon_halfspaces: repeated vertex");
    // Outward normal for counter-clockwise order.
    Eigen::Vector2d n(edge.y() / len, -edge.x() / len);
    out.normals.row(i) = n;
    out.offsets[i] = n.dot(a);
  }
  // Convexity: every vertex must satisfy every halfspace.
  for (const auto& v : vertices) {
    if (!out.contains(v, 1e-9)) throw ConfigError("polygon_halfspaces: polygon is not convex");
  }
  return out;
}

HalfspaceSet inscribed_norm_polytope(int sides, double bound) {
  if (sides < 3) throw ConfigError("inscribed_norm_polytope: need at least 3 sides");
  if (bound <= 0.0) throw ConfigError("inscribed_norm_polytope: bound must be positive");
  HalfspaceSet out;
  out.normals.resize(sides, 2);
  out.offsets.resize(sides);
  const double apothem = bound * std::cos(M_PI / sides);
  for (int k = 0; k < sides; ++k) {
    const double a = 2.0 * M_PI * k / sides;
    out.normals.row(k) = Eigen::Vector2d(std::cos(a), std::sin(a));
    out.offsets[k] = apothem;
  }
  return out;
}

Eigen::Vector2d sample_in_polytope(const HalfspaceSet& set, Rng& rng) {
  // Bounding radius from the polytope vertices (pairwise halfspace
  // intersections), then rejection sampling from the enclosing box.
  double radius = 0.0;
  for (int i = 0; i < set.rows(); ++i) {
    for (int j = i + 1; j < set.rows(); ++j) {
      Eigen::Matrix2d n;
      n.row(0) = set.normals.row(i);
      n.row(1) = set.normals.row(j);
      if (std::abs(n.determinant()) < 1e-10) continue;
      const Eigen::Vector2d v = n.inverse() * Eigen::Vector2d(set.offsets[i], set.offsets[j]);
      if (set.contains(v, 1e-9)) radius = std::max(radius, v.norm());
    }
  }
  if (radius <= 0.0) throw ConfigError("sample_in_polytope: empty or unbounded polytope");
  std::uniform_real_distribution<double> u(-radius, radius);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Eigen::Vector2d p(u(rng), u(rng));
    if (set.contains(p)) return p;
  }
  throw ConfigError("sample_in_polytope: rejection sampling failed");
}

}  // namespace liftgame
