// mesh.hpp -- closed triangulated surfaces and their elementary geometry

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace smallbody {

using Vec3 = Eigen::Vector3d;

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometrySummary {
  double area = 0.0;      // |S|
  double volume = 0.0;    // enclosed volume, divergence theorem
  Vec3 centroid = Vec3::Zero();
  double diameter = 0.0;  // max pairwise vertex distance
};

/// A watertight, consistently oriented triangulated surface.
///
/// Triangles are counter-clockwise when viewed from outside, so the
/// cross-product normal points out of the enclosed volume. The constructor
/// validates watertightness, orientation (positive enclosed volume) and
/// non-degeneracy; a mesh that exists is a valid mesh. Instances are
/// immutable and safe to share across threads.
class TriangleMesh {
 public:
  TriangleMesh(std::vector<Vec3> vertices,
               std::vector<std::array<int, 3>> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const {
    return triangles_;
  }
  std::size_t triangle_count() const { return triangles_.size(); }

  // Per-triangle precomputed quantities, indexed like triangles().
  const std::vector<Vec3>& centroids() const { return centroids_; }
  const std::vector<Vec3>& normals() const { return normals_; }  // unit, exterior
  const std::vector<double>& areas() const { return areas_; }
  // Max distance from a triangle's centroid to its vertices; used by
  // quadrature tier selection.
  const std::vector<double>& panel_radii() const { return panel_radii_; }

  std::array<Vec3, 3> triangle_vertices(std::size_t t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
  }

  /// New mesh with vertices mapped through x -> linear*x + shift.
  /// The caller is responsible for keeping the orientation positive
  /// (det(linear) > 0).
  TriangleMesh transformed(const Eigen::Matrix3d& linear,
                           const Vec3& shift) const;

  /// Hash of the vertex/triangle data, for property caching.
  std::uint64_t content_hash() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Vec3> centroids_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
  std::vector<double> panel_radii_;
};

GeometrySummary summarize(const TriangleMesh& mesh);

/// Icosphere: icosahedron refined by midpoint subdivision, vertices
/// projected to the sphere. 20*4^subdivisions triangles.
TriangleMesh generate_sphere(double radius, int subdivisions);

/// Icosphere scaled anisotropically by the semi-axes.
TriangleMesh generate_ellipsoid(const Vec3& semi_axes, int subdivisions);

}  // namespace smallbody
