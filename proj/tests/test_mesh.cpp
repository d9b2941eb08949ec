#include "smallbody/mesh.hpp"
#include "smallbody/mesh_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace smallbody;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "smallbody_mesh_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("icosphere structure and convergence") {
  for (int sub = 0; sub <= 3; ++sub) {
    auto mesh = generate_sphere(1.0, sub);
    CHECK(mesh.triangle_count() == 20u * (1u << (2 * sub)));
    for (const auto& v : mesh.vertices())
      CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto s4 = generate_sphere(1.0, 4);
  auto g = summarize(s4);
  CHECK(std::abs(g.area - 4 * M_PI) / (4 * M_PI) < 2e-3);
  CHECK(std::abs(g.volume - 4 * M_PI / 3) / (4 * M_PI / 3) < 3e-3);
  CHECK(g.centroid.norm() < 1e-12);
  CHECK(g.diameter == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("icosahedron volume matches the closed form") {
  // Regular icosahedron with circumradius 1: edge 4/sqrt(10+2*sqrt 5),
  // volume (5/12)(3+sqrt 5) edge^3.
  auto ico = generate_sphere(1.0, 0);
  double edge = 4.0 / std::sqrt(10.0 + 2.0 * std::sqrt(5.0));
  double expected = 5.0 / 12.0 * (3.0 + std::sqrt(5.0)) * edge * edge * edge;
  auto g = summarize(ico);
  CHECK(g.volume == doctest::Approx(expected).epsilon(1e-12));
  CHECK(g.volume < 4 * M_PI / 3);
}

TEST_CASE("refinement increases inscribed volume toward the sphere") {
  double prev = 0.0;
  for (int sub = 0; sub <= 4; ++sub) {
    double v = summarize(generate_sphere(1.0, sub)).volume;
    CHECK(v > prev);
    CHECK(v < 4 * M_PI / 3);
    prev = v;
  }
}

TEST_CASE("scaling and translation laws") {
  auto base = generate_sphere(1.0, 2);
  auto gb = summarize(base);
  SUBCASE("radius scaling") {
    auto g2 = summarize(generate_sphere(2.0, 2));
    CHECK(g2.area == doctest::Approx(4 * gb.area).epsilon(1e-12));
    CHECK(g2.volume == doctest::Approx(8 * gb.volume).epsilon(1e-12));
    CHECK(g2.diameter == doctest::Approx(2 * gb.diameter).epsilon(1e-12));
  }
  SUBCASE("translation invariance") {
    auto moved = base.transformed(Eigen::Matrix3d::Identity(), {10, 0, 0});
    auto gm = summarize(moved);
    CHECK(gm.area == doctest::Approx(gb.area).epsilon(1e-12));
    CHECK(gm.volume == doctest::Approx(gb.volume).epsilon(1e-12));
    CHECK(gm.diameter == doctest::Approx(gb.diameter).epsilon(1e-12));
    CHECK((gm.centroid - (gb.centroid + Vec3(10, 0, 0))).norm() < 1e-10);
  }
  SUBCASE("general scaling property") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> scale(0.3, 3.0);
    for (int trial = 0; trial < 5; ++trial) {
      double t = scale(rng);
      auto gs = summarize(
          base.transformed(t * Eigen::Matrix3d::Identity(), Vec3::Zero()));
      CHECK(gs.area == doctest::Approx(t * t * gb.area).epsilon(1e-10));
      CHECK(gs.volume == doctest::Approx(t * t * t * gb.volume).epsilon(1e-10));
      CHECK(gs.diameter == doctest::Approx(t * gb.diameter).epsilon(1e-10));
    }
  }
}

TEST_CASE("isoperimetric sanity") {
  for (int sub = 1; sub <= 3; ++sub) {
    auto g = summarize(generate_sphere(1.0, sub));
    CHECK(g.area * g.area * g.area >= 36 * M_PI * g.volume * g.volume);
    CHECK(g.diameter >= std::cbrt(6 * g.volume / M_PI) * (1 - 1e-12));
  }
  auto e = summarize(generate_ellipsoid({2, 1, 1}, 3));
  CHECK(e.area * e.area * e.area >= 36 * M_PI * e.volume * e.volume);
}

TEST_CASE("ellipsoid generation") {
  SUBCASE("degenerates to the sphere") {
    auto a = generate_ellipsoid({1, 1, 1}, 2);
    auto b = generate_sphere(1.0, 2);
    REQUIRE(a.vertices().size() == b.vertices().size());
    for (std::size_t i = 0; i < a.vertices().size(); ++i)
      CHECK((a.vertices()[i] - b.vertices()[i]).norm() < 1e-15);
  }
  SUBCASE("volume approaches the analytic value") {
    auto g = summarize(generate_ellipsoid({2, 1, 1}, 4));
    double exact = 4 * M_PI / 3 * 2.0;
    CHECK(std::abs(g.volume - exact) / exact < 5e-3);
    CHECK(g.centroid.norm() < 1e-12);
  }
}

TEST_CASE("mesh invariant violations are rejected") {
  auto good = generate_sphere(1.0, 1);
  SUBCASE("missing facet") {
    auto tris = good.triangles();
    tris.pop_back();
    CHECK_THROWS_WITH_AS(TriangleMesh(good.vertices(), tris),
                         "non-watertight: 3 boundary edges", MeshError);
  }
  SUBCASE("inverted orientation") {
    auto tris = good.triangles();
    for (auto& t : tris) std::swap(t[1], t[2]);
    CHECK_THROWS_WITH_AS(TriangleMesh(good.vertices(), tris),
                         "negative enclosed volume", MeshError);
  }
  SUBCASE("degenerate triangle") {
    auto tris = good.triangles();
    tris[0][1] = tris[0][0];
    CHECK_THROWS_AS(TriangleMesh(good.vertices(), tris), MeshError);
  }
}

TEST_CASE("STL and OBJ round trips through the loaders") {
  auto mesh = generate_sphere(1.0, 2);
  auto ref = summarize(mesh);

  SUBCASE("binary STL") {
    auto path = temp_file("sphere.stl");
    save_stl_binary(mesh, path);
    auto loaded = load_mesh(path);
    CHECK(loaded.triangle_count() == mesh.triangle_count());
    auto g = summarize(loaded);
    // float32 storage costs ~1e-7 relative
    CHECK(std::abs(g.area - ref.area) / ref.area < 1e-6);
    CHECK(std::abs(g.volume - ref.volume) / ref.volume < 1e-6);
  }
  SUBCASE("ASCII STL with explicit format") {
    auto path = temp_file("sphere_ascii.stl");
    save_stl_ascii(mesh, path);
    auto loaded = load_mesh(path, MeshFormat::StlAscii);
    CHECK(loaded.triangle_count() == mesh.triangle_count());
    CHECK(summarize(loaded).volume ==
          doctest::Approx(ref.volume).epsilon(1e-12));
  }
  SUBCASE("ASCII STL sniffed from content") {
    auto path = temp_file("sphere_sniff.stl");
    save_stl_ascii(mesh, path);
    CHECK(load_mesh(path).triangle_count() == mesh.triangle_count());
  }
  SUBCASE("OBJ") {
    auto path = temp_file("sphere.obj");
    save_obj(mesh, path);
    auto loaded = load_mesh(path);
    CHECK(loaded.triangle_count() == mesh.triangle_count());
    CHECK(summarize(loaded).volume ==
          doctest::Approx(ref.volume).epsilon(1e-12));
  }
}

TEST_CASE("loader error reporting") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.stl"), MeshError);
  }
  SUBCASE("binary STL with one facet removed") {
    auto mesh = generate_sphere(1.0, 1);
    auto path = temp_file("holed.stl");
    save_stl_binary(mesh, path);
    // Drop the last facet record and patch the count.
    auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 50);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    std::uint32_t n = static_cast<std::uint32_t>(mesh.triangle_count()) - 1;
    f.seekp(80);
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.close();
    CHECK_THROWS_WITH_AS(load_mesh(path),
                         "non-watertight: 3 boundary edges", MeshError);
  }
  SUBCASE("OBJ with reversed faces") {
    auto mesh = generate_sphere(1.0, 1);
    auto path = temp_file("reversed.obj");
    {
      std::ofstream out(path);
      for (const auto& v : mesh.vertices())
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
      for (const auto& t : mesh.triangles())
        out << "f " << t[0] + 1 << ' ' << t[2] + 1 << ' ' << t[1] + 1 << '\n';
    }
    CHECK_THROWS_WITH_AS(load_mesh(path), "negative enclosed volume",
                         MeshError);
  }
  SUBCASE("garbage ASCII STL") {
    auto path = temp_file("garbage.stl");
    std::ofstream(path) << "solid nope\nfacet vertex oops\n";
    CHECK_THROWS_AS(load_mesh(path, MeshFormat::StlAscii), MeshError);
  }
}
