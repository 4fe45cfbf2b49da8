#pragma once

#include <Eigen/Core>

#include "liftgame/util.hpp"

namespace liftgame {

// Convex polytope {x : normals * x <= offsets} with unit row normals.
struct HalfspaceSet {
  Mat normals;   // k x d
  Vec offsets;   // k

  int rows() const { return static_cast<int>(normals.rows()); }

  bool contains(const Eigen::Ref<const Vec>& x, double tol = 0.0) const {
    return ((normals * x - offsets).array() <= tol).all();
  }

  // Largest violation, <= 0 when inside.
  double violation(const Eigen::Ref<const Vec>& x) const {
    return (normals * x - offsets).maxCoeff();
  }
};

// Vertices of a regular polygon, first vertex at `phase` radians.
std::vector<Eigen::Vector2d> regular_polygon(int sides, double circumradius, double phase);

// Halfspace form of a convex polygon given in counter-clockwise vertex order.
// Throws ConfigError when the polygon has fewer than 3 vertices or is not
// convex.
HalfspaceSet polygon_halfspaces(const std::vector<Eigen::Vector2d>& vertices);

// Regular polytope inscribed in the radius-`bound` circle (vertices on the
// circle), used to linearize Euclidean norm bounds.
HalfspaceSet inscribed_norm_polytope(int sides, double bound);

// Uniform sample over a convex polytope by rejection from its bounding box.
Eigen::Vector2d sample_in_polytope(const HalfspaceSet& set, Rng& rng);

}  // namespace liftgame
