#include "smallbody/potential.hpp"

#include "smallbody/panel.hpp"
#include "smallbody/parallel.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace smallbody {

namespace {

constexpr double kFarRatio = 8.0;   // centroid-pair monopole beyond this
constexpr double kMidRatio = 3.0;   // 3x3 Gauss product beyond this

// Pair integral of 1/|s-t| over panels i x j, graded by separation.
// Near pairs (including adjacent and i == j) use an outer 7-point Gauss
// rule against the analytic inner panel potential.
double pair_inverse_distance(const TriangleMesh& mesh, std::size_t i,
                             std::size_t j) {
  const Vec3& ci = mesh.centroids()[i];
  const Vec3& cj = mesh.centroids()[j];
  double dist = (ci - cj).norm();
  double s = std::max(mesh.panel_radii()[i], mesh.panel_radii()[j]);
  double Ai = mesh.areas()[i], Aj = mesh.areas()[j];
  if (dist > kFarRatio * s) return Ai * Aj / dist;
  auto ti = mesh.triangle_vertices(i);
  auto tj = mesh.triangle_vertices(j);
  if (dist > kMidRatio * s) {
    auto rule = triangle_rule(3);
    double sum = 0.0;
    for (const auto& qi : rule) {
      Vec3 xi = map_barycentric(ti, qi);
      for (const auto& qj : rule)
        sum += qi.w * qj.w / (xi - map_barycentric(tj, qj)).norm();
    }
    return Ai * Aj * sum;
  }
  double sum = 0.0;
  for (const auto& q : triangle_rule(7))
    sum += q.w * panel_potential(tj, map_barycentric(ti, q));
  return Ai * sum;
}

// Integral over panel j of the kernel psi(x, t) = d/dN_x (1/|x-t|)
// = N_i . (t - x)/|t - x|^3, evaluated at x = centroid of panel i.
// Vanishes for i == j (flat panel, principal value).
double pair_normal_derivative(const TriangleMesh& mesh, std::size_t i,
                              std::size_t j) {
  if (i == j) return 0.0;
  const Vec3& ci = mesh.centroids()[i];
  const Vec3& cj = mesh.centroids()[j];
  const Vec3& ni = mesh.normals()[i];
  double dist = (ci - cj).norm();
  double s = std::max(mesh.panel_radii()[i], mesh.panel_radii()[j]);
  if (dist > kFarRatio * s) {
    Vec3 r = cj - ci;
    return mesh.areas()[j] * ni.dot(r) / (dist * dist * dist);
  }
  auto tj = mesh.triangle_vertices(j);
  if (dist > kMidRatio * s) {
    double sum = 0.0;
    for (const auto& q : triangle_rule(3)) {
      Vec3 r = map_barycentric(tj, q) - ci;
      double rn = r.norm();
      sum += q.w * ni.dot(r) / (rn * rn * rn);
    }
    return mesh.areas()[j] * sum;
  }
  return ni.dot(panel_potential_gradient(tj, ci));
}

// Row sums of the 1/r pair matrix, g_i = sum_j G_ij, and J = sum_i g_i.
Eigen::VectorXd inverse_distance_row_sums(const TriangleMesh& mesh) {
  const std::size_t n = mesh.triangle_count();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  std::mutex merge;
  // partials merged in chunk order, so the summation order (and hence the
  // result, bit for bit) does not depend on thread scheduling
  std::map<std::size_t, Eigen::VectorXd> partials;
  parallel_chunks(n, [&](std::size_t lo, std::size_t hi) {
    Eigen::VectorXd local = Eigen::VectorXd::Zero(n);
    for (std::size_t i = lo; i < hi; ++i) {
      local[i] += pair_inverse_distance(mesh, i, i);
      for (std::size_t j = i + 1; j < n; ++j) {
        double v = pair_inverse_distance(mesh, i, j);
        local[i] += v;
        local[j] += v;
      }
    }
    std::lock_guard<std::mutex> lock(merge);
    partials.emplace(lo, std::move(local));
  });
  for (const auto& [lo, local] : partials) g += local;
  return g;
}

// Diagonal of the discrete psi-operator, fixed by the column-sum rule so
// the Gauss identity sum_i A_i P_ij = -2 pi A_j holds exactly. The flat
// -panel principal value is zero; the correction absorbs the collocation
// error that would otherwise bias every series order by a constant factor.
Eigen::VectorXd psi_diagonal(const TriangleMesh& mesh) {
  const std::size_t n = mesh.triangle_count();
  Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
  std::mutex merge;
  std::map<std::size_t, Eigen::VectorXd> partials;  // merged in chunk order
  parallel_chunks(n, [&](std::size_t lo, std::size_t hi) {
    Eigen::VectorXd local = Eigen::VectorXd::Zero(n);
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (j != i)
          local[j] += mesh.areas()[i] * pair_normal_derivative(mesh, i, j);
    std::lock_guard<std::mutex> lock(merge);
    partials.emplace(lo, std::move(local));
  });
  for (const auto& [lo, local] : partials) col += local;
  Eigen::VectorXd d(n);
  for (std::size_t j = 0; j < n; ++j)
    d[j] = -2.0 * M_PI - col[j] / mesh.areas()[j];
  return d;
}

// y = P u with P_ij = integral over panel j of psi(c_i, t) dt and the
// diagonal from psi_diagonal.
Eigen::VectorXd apply_normal_derivative(const TriangleMesh& mesh,
                                        const Eigen::VectorXd& diag,
                                        const Eigen::VectorXd& u) {
  const std::size_t n = mesh.triangle_count();
  Eigen::VectorXd y(n);
  parallel_chunks(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double acc = diag[i] * u[i];
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) acc += pair_normal_derivative(mesh, i, j) * u[j];
      y[i] = acc;
    }
  });
  return y;
}

}  // namespace

double inverse_distance_double_integral(const TriangleMesh& mesh) {
  return inverse_distance_row_sums(mesh).sum();
}

CapacitanceResult capacitance(const TriangleMesh& mesh, int n) {
  if (n < 0) throw std::invalid_argument("capacitance order must be >= 0");
  if (n > 4)
    throw std::invalid_argument(
        "capacitance order > 4 not supported (cost grows one surface factor "
        "per order)");
  double area = 0.0;
  for (double a : mesh.areas()) area += a;

  Eigen::VectorXd g = inverse_distance_row_sums(mesh);
  CapacitanceResult result;
  result.order = n;
  Eigen::VectorXd u = Eigen::VectorXd::Ones(mesh.triangle_count());
  Eigen::VectorXd diag;
  if (n > 0) diag = psi_diagonal(mesh);
  const double c0_num = 4.0 * M_PI * area * area;
  for (int order = 0; order <= n; ++order) {
    if (order > 0) {
      u = apply_normal_derivative(mesh, diag, u);
      u *= -1.0 / (2.0 * M_PI);
    }
    double denom = g.dot(u);
    if (denom <= 0.0)
      throw std::runtime_error("capacitance series denominator not positive");
    result.series.push_back(c0_num / denom);
  }
  result.value = result.series.back();

  if (n >= 2) {
    double d_last = std::abs(result.series[n] - result.series[n - 1]);
    double d_prev = std::abs(result.series[n - 1] - result.series[n - 2]);
    if (d_prev > 0.0) result.estimated_ratio = d_last / d_prev;
  }
  // Flag two consecutive growing differences.
  int growing = 0;
  for (int o = 2; o <= n; ++o) {
    double d1 = std::abs(result.series[o] - result.series[o - 1]);
    double d0 = std::abs(result.series[o - 1] - result.series[o - 2]);
    growing = (d1 > d0) ? growing + 1 : 0;
    if (growing >= 2) result.divergence_warning = true;
  }
  return result;
}

Eigen::MatrixXd double_layer_operator(const TriangleMesh& mesh) {
  const std::size_t n = mesh.triangle_count();
  Eigen::MatrixXd A(n, n);
  parallel_chunks(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec3& ci = mesh.centroids()[i];
      double offdiag = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        // Exact per-panel solid angle: kernel N_t.(c_i - t)/(2 pi r^3).
        double a = -panel_solid_angle(mesh.triangle_vertices(j), ci) /
                   (2.0 * M_PI);
        A(i, j) = a;
        offdiag += a;
      }
      A(i, i) = -1.0 - offdiag;  // row-sum (solid angle) rule
    }
  });
  return A;
}

PolarizabilityTensor electric_polarizability(const TriangleMesh& mesh,
                                             double gamma,
                                             SurfaceDensities* densities) {
  if (gamma < -1.0 || gamma > 1.0)
    throw std::invalid_argument("gamma must lie in [-1, 1]");
  const std::size_t n = mesh.triangle_count();
  PolarizabilityTensor tensor;
  tensor.kind = PolarizabilityTensor::Kind::Electric;
  tensor.gamma = gamma;
  if (gamma == 0.0) {
    if (densities) *densities = Eigen::MatrixXd::Zero(n, 3);
    return tensor;  // zero contrast, zero response
  }

  GeometrySummary geom = summarize(mesh);
  Eigen::MatrixXd M = gamma * double_layer_operator(mesh);
  M.diagonal().array() += 1.0;

  Eigen::MatrixXd rhs(n, 3);
  for (std::size_t i = 0; i < n; ++i)
    rhs.row(i) = 2.0 * gamma * mesh.normals()[i].transpose();

  Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(M);
  Eigen::MatrixXd sigma = lu.solve(rhs);

  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 arm = mesh.centroids()[i] - geom.centroid;
    t += mesh.areas()[i] * arm * sigma.row(i);
  }
  tensor.entries = t / geom.volume;
  if (!tensor.entries.allFinite())
    throw std::runtime_error("polarizability system is singular");
  if (densities) *densities = std::move(sigma);
  return tensor;
}

PolarizabilityTensor electric_polarizability(const TriangleMesh& mesh,
                                             double gamma) {
  return electric_polarizability(mesh, gamma, nullptr);
}

PolarizabilityTensor magnetic_polarizability(const TriangleMesh& mesh) {
  PolarizabilityTensor t = electric_polarizability(mesh, -1.0);
  t.kind = PolarizabilityTensor::Kind::Magnetic;
  return t;
}

std::complex<double> impedance_capacitance(double capacitance,
                                           std::complex<double> zeta,
                                           double area) {
  if (capacitance <= 0.0) throw std::invalid_argument("capacitance must be > 0");
  if (area <= 0.0) throw std::invalid_argument("area must be > 0");
  if (zeta == std::complex<double>(0.0, 0.0))
    throw std::invalid_argument("zeta = 0: degenerate boundary condition");
  return capacitance / (1.0 + capacitance / (zeta * area));
}

}  // namespace smallbody
