#include "smallbody/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <utility>

namespace smallbody {

namespace {

double enclosed_volume(const std::vector<Vec3>& vertices,
                       const std::vector<std::array<int, 3>>& triangles) {
  double vol = 0.0;
  for (const auto& t : triangles) {
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    vol += a.dot(b.cross(c)) / 6.0;
  }
  return vol;
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices,
                           std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (vertices_.size() < 4 || triangles_.size() < 4)
    throw MeshError("mesh too small to enclose a volume");

  const int nv = static_cast<int>(vertices_.size());
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k)
      if (t[k] < 0 || t[k] >= nv)
        throw MeshError("triangle vertex index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw MeshError("degenerate triangle: repeated vertex index");
  }

  // Watertight check: every undirected edge must appear in exactly two
  // triangles, once per direction.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (++directed[{a, b}] > 1)
        throw MeshError("non-watertight: duplicated directed edge");
    }
  }
  int boundary = 0;
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end()) ++boundary;
  }
  if (boundary > 0)
    throw MeshError("non-watertight: " + std::to_string(boundary) +
                    " boundary edges");

  if (enclosed_volume(vertices_, triangles_) <= 0.0)
    throw MeshError("negative enclosed volume");

  centroids_.reserve(triangles_.size());
  normals_.reserve(triangles_.size());
  areas_.reserve(triangles_.size());
  panel_radii_.reserve(triangles_.size());
  for (const auto& t : triangles_) {
    const Vec3& a = vertices_[t[0]];
    const Vec3& b = vertices_[t[1]];
    const Vec3& c = vertices_[t[2]];
    Vec3 n = (b - a).cross(c - a);
    double area2 = n.norm();
    if (area2 <= 0.0) throw MeshError("degenerate triangle: zero area");
    Vec3 cen = (a + b + c) / 3.0;
    centroids_.push_back(cen);
    normals_.push_back(n / area2);
    areas_.push_back(0.5 * area2);
    panel_radii_.push_back(std::max({(a - cen).norm(), (b - cen).norm(),
                                     (c - cen).norm()}));
  }
}

TriangleMesh TriangleMesh::transformed(const Eigen::Matrix3d& linear,
                                       const Vec3& shift) const {
  std::vector<Vec3> v(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    v[i] = linear * vertices_[i] + shift;
  return TriangleMesh(std::move(v), triangles_);
}

std::uint64_t TriangleMesh::content_hash() const {
  // FNV-1a over the raw coordinate and index bytes.
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& v : vertices_) {
    double c[3] = {v.x(), v.y(), v.z()};
    mix(c, sizeof(c));
  }
  for (const auto& t : triangles_) mix(t.data(), sizeof(int) * 3);
  return h;
}

GeometrySummary summarize(const TriangleMesh& mesh) {
  GeometrySummary s;
  Vec3 moment = Vec3::Zero();
  const auto& tris = mesh.triangles();
  const auto& verts = mesh.vertices();
  for (std::size_t i = 0; i < tris.size(); ++i) {
    s.area += mesh.areas()[i];
    const Vec3& a = verts[tris[i][0]];
    const Vec3& b = verts[tris[i][1]];
    const Vec3& c = verts[tris[i][2]];
    double dv = a.dot(b.cross(c)) / 6.0;
    s.volume += dv;
    // Centroid of the tetrahedron (origin, a, b, c), volume-weighted.
    moment += dv * (a + b + c) / 4.0;
  }
  s.centroid = moment / s.volume;
  double d2 = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (std::size_t j = i + 1; j < verts.size(); ++j)
      d2 = std::max(d2, (verts[i] - verts[j]).squaredNorm());
  s.diameter = std::sqrt(d2);
  return s;
}

namespace {

struct IcoMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

IcoMesh unit_icosphere(int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  IcoMesh m;
  m.vertices = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.triangles = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10},
                 {0, 10, 11}, {1, 5, 9},   {5, 11, 4},  {11, 10, 2},
                 {10, 7, 6},  {7, 1, 8},   {3, 9, 4},   {3, 4, 2},
                 {3, 2, 6},   {3, 6, 8},   {3, 8, 9},   {4, 9, 5},
                 {2, 4, 11},  {6, 2, 10},  {8, 6, 7},   {9, 8, 1}};
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 v = (m.vertices[a] + m.vertices[b]).normalized();
      int idx = static_cast<int>(m.vertices.size());
      m.vertices.push_back(v);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& t : m.triangles) {
      int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  return m;
}

}  // namespace

TriangleMesh generate_sphere(double radius, int subdivisions) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  if (subdivisions < 0)
    throw std::invalid_argument("subdivisions must be non-negative");
  IcoMesh m = unit_icosphere(subdivisions);
  for (auto& v : m.vertices) v *= radius;
  return TriangleMesh(std::move(m.vertices), std::move(m.triangles));
}

TriangleMesh generate_ellipsoid(const Vec3& semi_axes, int subdivisions) {
  if (semi_axes.minCoeff() <= 0.0)
    throw std::invalid_argument("semi-axes must be positive");
  if (subdivisions < 0)
    throw std::invalid_argument("subdivisions must be non-negative");
  IcoMesh m = unit_icosphere(subdivisions);
  for (auto& v : m.vertices) v = v.cwiseProduct(semi_axes);
  return TriangleMesh(std::move(m.vertices), std::move(m.triangles));
}

}  // namespace smallbody
