#include "smallbody/panel.hpp"

#include <cmath>

namespace smallbody {

namespace {

struct EdgeFrame {
  double t;        // in-plane distance from x's projection to the edge line,
                   // positive on the outward side
  double lm, lp;   // projections of the edge endpoints along the edge
  double Rm, Rp;   // distances from x to the edge endpoints
  Vec3 m_hat;      // outward in-plane edge normal
};

// Per-edge geometry shared by the potential and its gradient.
// h is the signed height of x over the triangle plane.
template <typename F>
void for_each_edge(const std::array<Vec3, 3>& tri, const Vec3& x,
                   const Vec3& n_hat, F&& f) {
  for (int e = 0; e < 3; ++e) {
    const Vec3& a = tri[e];
    const Vec3& b = tri[(e + 1) % 3];
    Vec3 s = b - a;
    double len = s.norm();
    if (len <= 0.0) continue;
    s /= len;
    EdgeFrame fr;
    fr.m_hat = s.cross(n_hat);
    fr.t = (a - x).dot(fr.m_hat);
    fr.lm = (a - x).dot(s);
    fr.lp = (b - x).dot(s);
    fr.Rm = (a - x).norm();
    fr.Rp = (b - x).norm();
    f(fr);
  }
}

double edge_log(const EdgeFrame& fr) {
  // ln((R+ + l+)/(R- + l-)), rewritten when the sums lose accuracy
  // (x beyond the edge on its line).
  double num = fr.Rp + fr.lp;
  double den = fr.Rm + fr.lm;
  if (num <= 0.0 || den <= 0.0) return 0.0;  // x on the edge line segment
  if (fr.lp < 0.0 && fr.lm < 0.0) return std::log((fr.Rm - fr.lm) /
                                                  (fr.Rp - fr.lp));
  return std::log(num / den);
}

}  // namespace

double panel_potential(const std::array<Vec3, 3>& tri, const Vec3& x) {
  Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
  double nn = n.norm();
  if (nn <= 0.0) return 0.0;
  Vec3 n_hat = n / nn;
  double h = (x - tri[0]).dot(n_hat);
  double ah = std::abs(h);
  double phi = 0.0;
  for_each_edge(tri, x, n_hat, [&](const EdgeFrame& fr) {
    double L = edge_log(fr);
    phi += fr.t * L;
    if (ah > 0.0) {
      double R02 = fr.t * fr.t + h * h;
      phi -= ah * (std::atan2(fr.t * fr.lp, R02 + ah * fr.Rp) -
                   std::atan2(fr.t * fr.lm, R02 + ah * fr.Rm));
    }
  });
  return phi;
}

Vec3 panel_potential_gradient(const std::array<Vec3, 3>& tri, const Vec3& x) {
  Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
  double nn = n.norm();
  if (nn <= 0.0) return Vec3::Zero();
  Vec3 n_hat = n / nn;
  Vec3 grad = Vec3::Zero();
  for_each_edge(tri, x, n_hat, [&](const EdgeFrame& fr) {
    grad -= fr.m_hat * edge_log(fr);
  });
  grad += n_hat * panel_solid_angle(tri, x);
  return grad;
}

double panel_solid_angle(const std::array<Vec3, 3>& tri, const Vec3& x) {
  Vec3 a = tri[0] - x, b = tri[1] - x, c = tri[2] - x;
  double la = a.norm(), lb = b.norm(), lc = c.norm();
  double num = a.dot(b.cross(c));
  double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
  return 2.0 * std::atan2(num, den);
}

std::span<const TriQuadPoint> triangle_rule(int points) {
  static const std::array<TriQuadPoint, 1> rule1 = {{
      {1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0},
  }};
  static const std::array<TriQuadPoint, 3> rule3 = {{
      {2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3},
      {1.0 / 6, 2.0 / 3, 1.0 / 6, 1.0 / 3},
      {1.0 / 6, 1.0 / 6, 2.0 / 3, 1.0 / 3},
  }};
  // Degree-5 rule (Strang-Fix); a1/a2 groups plus the centroid.
  static const std::array<TriQuadPoint, 7> rule7 = [] {
    std::array<TriQuadPoint, 7> r{};
    const double w0 = 9.0 / 40.0;
    const double a1 = (6.0 - std::sqrt(15.0)) / 21.0;
    const double w1 = (155.0 - std::sqrt(15.0)) / 1200.0;
    const double a2 = (6.0 + std::sqrt(15.0)) / 21.0;
    const double w2 = (155.0 + std::sqrt(15.0)) / 1200.0;
    r[0] = {1.0 / 3, 1.0 / 3, 1.0 / 3, w0};
    r[1] = {a1, a1, 1 - 2 * a1, w1};
    r[2] = {a1, 1 - 2 * a1, a1, w1};
    r[3] = {1 - 2 * a1, a1, a1, w1};
    r[4] = {a2, a2, 1 - 2 * a2, w2};
    r[5] = {a2, 1 - 2 * a2, a2, w2};
    r[6] = {1 - 2 * a2, a2, a2, w2};
    return r;
  }();
  switch (points) {
    case 1:
      return rule1;
    case 3:
      return rule3;
    case 7:
      return rule7;
    default:
      throw std::invalid_argument("no such triangle rule");
  }
}

}  // namespace smallbody
