#include "smallbody/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace smallbody {

namespace {

struct Soup {
  // Raw facet soup, three vertices per facet, not yet welded.
  std::vector<Vec3> points;
};

[[noreturn]] void parse_fail(const std::string& what) {
  throw MeshError("parse failure: " + what);
}

Soup read_stl_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open " + path.string());
  char header[80];
  in.read(header, 80);
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  if (!in) parse_fail("truncated STL header");
  Soup soup;
  soup.points.reserve(3 * n);
  for (std::uint32_t i = 0; i < n; ++i) {
    float buf[12];
    in.read(reinterpret_cast<char*>(buf), 48);
    std::uint16_t attr;
    in.read(reinterpret_cast<char*>(&attr), 2);
    if (!in) parse_fail("truncated STL facet " + std::to_string(i));
    for (int v = 0; v < 3; ++v)
      soup.points.emplace_back(buf[3 + 3 * v], buf[4 + 3 * v], buf[5 + 3 * v]);
  }
  return soup;
}

Soup read_stl_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open " + path.string());
  Soup soup;
  std::string tok;
  while (in >> tok) {
    if (tok == "vertex") {
      double x, y, z;
      if (!(in >> x >> y >> z)) parse_fail("bad vertex record in ASCII STL");
      soup.points.emplace_back(x, y, z);
    }
  }
  if (soup.points.empty() || soup.points.size() % 3 != 0)
    parse_fail("ASCII STL vertex count not a multiple of 3");
  return soup;
}

TriangleMesh weld(const Soup& soup) {
  if (soup.points.size() < 12) parse_fail("fewer than 4 facets");
  // Welding tolerance is relative to the bounding-box diagonal, a cheap
  // stand-in for the diameter available before the mesh exists.
  Vec3 lo = soup.points.front(), hi = soup.points.front();
  for (const auto& p : soup.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double tol = 1e-9 * (hi - lo).norm();
  if (tol <= 0.0) parse_fail("degenerate point cloud");

  struct CellHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& c) const {
      std::size_t h = 1469598103934665603ull;
      for (auto v : c) {
        h ^= static_cast<std::size_t>(v);
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, int, CellHash> grid;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  auto lookup = [&](const Vec3& p) {
    std::array<std::int64_t, 3> base;
    for (int k = 0; k < 3; ++k)
      base[k] = static_cast<std::int64_t>(std::floor(p[k] / tol));
    // Probe the 27 cells around the point so near-boundary duplicates merge.
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({base[0] + dx, base[1] + dy, base[2] + dz});
          if (it != grid.end() && (vertices[it->second] - p).norm() <= tol)
            return it->second;
        }
    int idx = static_cast<int>(vertices.size());
    vertices.push_back(p);
    grid[base] = idx;
    return idx;
  };
  for (std::size_t f = 0; f + 2 < soup.points.size(); f += 3)
    triangles.push_back({lookup(soup.points[f]), lookup(soup.points[f + 1]),
                         lookup(soup.points[f + 2])});
  return TriangleMesh(std::move(vertices), std::move(triangles));
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open " + path.string());
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        parse_fail("bad v record at line " + std::to_string(lineno));
      vertices.emplace_back(x, y, z);
    } else if (kind == "f") {
      std::vector<int> idx;
      std::string field;
      while (ls >> field) {
        // "i", "i/t", "i/t/n" and "i//n" all start with the vertex index.
        int i = 0;
        try {
          i = std::stoi(field);
        } catch (...) {
          parse_fail("bad f record at line " + std::to_string(lineno));
        }
        if (i < 0) i = static_cast<int>(vertices.size()) + 1 + i;
        idx.push_back(i - 1);
      }
      if (idx.size() < 3)
        parse_fail("face with fewer than 3 vertices at line " +
                   std::to_string(lineno));
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
    // All other record types are ignored.
  }
  return TriangleMesh(std::move(vertices), std::move(triangles));
}

bool looks_ascii_stl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char buf[512] = {};
  in.read(buf, sizeof(buf));
  std::string head(buf, static_cast<std::size_t>(in.gcount()));
  auto pos = head.find_first_not_of(" \t\r\n");
  if (pos == std::string::npos || head.compare(pos, 5, "solid") != 0)
    return false;
  // Binary files may also start with "solid"; require a "facet" token.
  return head.find("facet") != std::string::npos;
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  if (!std::filesystem::exists(path))
    throw MeshError("no such file: " + path.string());
  if (format == MeshFormat::Auto) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj")
      format = MeshFormat::Obj;
    else
      format = looks_ascii_stl(path) ? MeshFormat::StlAscii
                                     : MeshFormat::StlBinary;
  }
  switch (format) {
    case MeshFormat::StlBinary:
      return weld(read_stl_binary(path));
    case MeshFormat::StlAscii:
      return weld(read_stl_ascii(path));
    case MeshFormat::Obj:
      return read_obj(path);
    default:
      throw MeshError("unresolved mesh format");
  }
}

void save_stl_binary(const TriangleMesh& mesh,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MeshError("cannot write " + path.string());
  char header[80] = {};
  std::snprintf(header, sizeof(header), "smallbody binary STL");
  out.write(header, 80);
  auto n = static_cast<std::uint32_t>(mesh.triangle_count());
  out.write(reinterpret_cast<const char*>(&n), 4);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    auto v = mesh.triangle_vertices(t);
    float buf[12];
    Vec3 nrm = mesh.normals()[t];
    for (int k = 0; k < 3; ++k) buf[k] = static_cast<float>(nrm[k]);
    for (int p = 0; p < 3; ++p)
      for (int k = 0; k < 3; ++k)
        buf[3 + 3 * p + k] = static_cast<float>(v[p][k]);
    out.write(reinterpret_cast<const char*>(buf), 48);
    std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
}

void save_stl_ascii(const TriangleMesh& mesh,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path.string());
  out << "solid smallbody\n";
  out.precision(17);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    auto v = mesh.triangle_vertices(t);
    Vec3 n = mesh.normals()[t];
    out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << '\n'
        << "    outer loop\n";
    for (int p = 0; p < 3; ++p)
      out << "      vertex " << v[p].x() << ' ' << v[p].y() << ' ' << v[p].z()
          << '\n';
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid smallbody\n";
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path.string());
  out.precision(17);
  for (const auto& v : mesh.vertices())
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles())
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace smallbody
