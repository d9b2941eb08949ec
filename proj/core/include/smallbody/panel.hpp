// panel.hpp -- analytic and quadrature primitives on single flat triangles

#pragma once

#include "smallbody/mesh.hpp"

#include <array>
#include <span>

namespace smallbody {

/// Newtonian potential of a unit-density flat triangle:
/// integral over the triangle of 1/|x - y| dA(y).
/// Valid for x anywhere, including in the triangle's plane and inside it.
double panel_potential(const std::array<Vec3, 3>& tri, const Vec3& x);

/// Gradient (in x) of panel_potential. For x in the triangle's plane the
/// normal component is the principal value (zero).
Vec3 panel_potential_gradient(const std::array<Vec3, 3>& tri, const Vec3& x);

/// Signed solid angle: integral over the triangle of (y-x).n / |y-x|^3 dA,
/// with n the triangle's cross-product normal. Positive when n points away
/// from x. Van Oosterom-Strackee formula.
double panel_solid_angle(const std::array<Vec3, 3>& tri, const Vec3& x);

struct TriQuadPoint {
  double b0, b1, b2;  // barycentric coordinates
  double w;           // weight, sums to 1 over the rule
};

/// Symmetric Gauss rules on the triangle; weights sum to 1 (multiply by
/// the triangle area). Available orders: 1 (centroid), 3 (degree 2),
/// 7 (degree 5).
std::span<const TriQuadPoint> triangle_rule(int points);

inline Vec3 map_barycentric(const std::array<Vec3, 3>& tri,
                            const TriQuadPoint& q) {
  return q.b0 * tri[0] + q.b1 * tri[1] + q.b2 * tri[2];
}

}  // namespace smallbody
