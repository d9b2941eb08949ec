// Oracle checks for the analytic flat-panel integrals: compare against
// brute-force recursive subdivision quadrature.

#include "smallbody/panel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace smallbody;

namespace {

double tri_area(const std::array<Vec3, 3>& t) {
  return 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
}

// Recursive midpoint-subdivision quadrature of f over a triangle.
template <typename F>
double subdivide_quad(const std::array<Vec3, 3>& t, const F& f, int depth) {
  if (depth == 0) {
    Vec3 c = (t[0] + t[1] + t[2]) / 3.0;
    return tri_area(t) * f(c);
  }
  Vec3 ab = 0.5 * (t[0] + t[1]);
  Vec3 bc = 0.5 * (t[1] + t[2]);
  Vec3 ca = 0.5 * (t[2] + t[0]);
  return subdivide_quad<F>({t[0], ab, ca}, f, depth - 1) +
         subdivide_quad<F>({t[1], bc, ab}, f, depth - 1) +
         subdivide_quad<F>({t[2], ca, bc}, f, depth - 1) +
         subdivide_quad<F>({ab, bc, ca}, f, depth - 1);
}

std::array<Vec3, 3> random_triangle(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    std::array<Vec3, 3> t = {Vec3(u(rng), u(rng), u(rng)),
                             Vec3(u(rng), u(rng), u(rng)),
                             Vec3(u(rng), u(rng), u(rng))};
    if (tri_area(t) > 0.1) return t;
  }
}

}  // namespace

TEST_CASE("analytic panel potential matches brute-force quadrature off-panel") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto t = random_triangle(rng);
    Vec3 c = (t[0] + t[1] + t[2]) / 3.0;
    Vec3 n = (t[1] - t[0]).cross(t[2] - t[0]).normalized();
    Vec3 x = c + (1.0 + std::abs(u(rng))) * n + 0.3 * Vec3(u(rng), u(rng), 0);
    double exact = panel_potential(t, x);
    double brute =
        subdivide_quad(t, [&](const Vec3& y) { return 1.0 / (x - y).norm(); },
                       7);
    CHECK(exact == doctest::Approx(brute).epsilon(1e-5));
  }
}

TEST_CASE("analytic panel potential at in-plane and interior points") {
  // Unit right triangle; observation at its centroid (the singular case the
  // self-term uses).
  std::array<Vec3, 3> t = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  Vec3 c = (t[0] + t[1] + t[2]) / 3.0;
  double exact = panel_potential(t, c);
  // Duffy-style oracle: integrate 1/r by splitting at the centroid into
  // three triangles, each with the singularity at a vertex, refined deeply;
  // midpoint subdivision converges since 1/r is integrable.
  auto f = [&](const Vec3& y) { return 1.0 / (c - y).norm(); };
  double brute = subdivide_quad({t[0], t[1], c}, f, 11) +
                 subdivide_quad({t[1], t[2], c}, f, 11) +
                 subdivide_quad({t[2], t[0], c}, f, 11);
  CHECK(exact == doctest::Approx(brute).epsilon(2e-3));
  CHECK(exact > 0.0);

  // Slightly off-plane evaluation must agree with the in-plane limit.
  double above = panel_potential(t, c + Vec3(0, 0, 1e-9));
  CHECK(above == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto t = random_triangle(rng);
    Vec3 c = (t[0] + t[1] + t[2]) / 3.0;
    Vec3 n = (t[1] - t[0]).cross(t[2] - t[0]).normalized();
    Vec3 x = c + (0.8 + std::abs(u(rng))) * n + 0.4 * Vec3(u(rng), u(rng), u(rng));
    Vec3 grad = panel_potential_gradient(t, x);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e[k] = h;
      double fd =
          (panel_potential(t, x + e) - panel_potential(t, x - e)) / (2 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(5e-5));
    }
  }
}

TEST_CASE("solid angle sign convention and closure") {
  std::array<Vec3, 3> t = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  // Cross-product normal is +z; a point below sees a positive solid angle
  // (normal points away from it).
  CHECK(panel_solid_angle(t, Vec3(0.2, 0.2, -0.5)) > 0.0);
  CHECK(panel_solid_angle(t, Vec3(0.2, 0.2, 0.5)) < 0.0);

  // Far-field limit: Omega ~ -A cos(theta)/d^2 for a point on the +n side.
  Vec3 x(0.333, 0.333, 50.0);
  double omega = panel_solid_angle(t, x);
  CHECK(omega == doctest::Approx(-0.5 / (50.0 * 50.0)).epsilon(1e-3));
}

TEST_CASE("triangle rules integrate polynomials at their stated degree") {
  std::array<Vec3, 3> t = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  auto integrate = [&](int pts, auto f) {
    double sum = 0.0;
    for (const auto& q : triangle_rule(pts)) sum += q.w * f(map_barycentric(t, q));
    return tri_area(t) * sum;
  };
  // int over unit right triangle of x^a y^b = a! b! / (a+b+2)!
  auto exact = [](int a, int b) {
    auto fact = [](int n) { double r = 1; for (int i = 2; i <= n; ++i) r *= i; return r; };
    return fact(a) * fact(b) / fact(a + b + 2);
  };
  CHECK(integrate(1, [](const Vec3&) { return 1.0; }) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(integrate(3, [](const Vec3& p) { return p.x() * p.y(); }) ==
        doctest::Approx(exact(1, 1)).epsilon(1e-13));
  CHECK(integrate(7, [](const Vec3& p) {
          return std::pow(p.x(), 3) * std::pow(p.y(), 2);
        }) == doctest::Approx(exact(3, 2)).epsilon(1e-13));
  CHECK(integrate(7, [](const Vec3& p) { return std::pow(p.x(), 5); }) ==
        doctest::Approx(exact(5, 0)).epsilon(1e-13));
}
