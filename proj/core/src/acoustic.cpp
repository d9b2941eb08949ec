#include "smallbody/acoustic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace smallbody {

namespace {

constexpr Complex kImagUnit{0.0, 1.0};

struct GenericSolution {
  Eigen::VectorXcd x;
  double residual = 0.0;
  int iterations = 0;
};

double relative_residual(const AssembledSystem& sys,
                         const Eigen::VectorXcd& x) {
  Eigen::VectorXcd r = x + sys.coupling * x - sys.rhs;
  double scale = std::max(sys.rhs.cwiseAbs().maxCoeff(),
                          x.cwiseAbs().maxCoeff());
  if (scale == 0.0) return r.cwiseAbs().maxCoeff();
  return r.cwiseAbs().maxCoeff() / scale;
}

GenericSolution solve_system(const AssembledSystem& sys,
                             const SolveMethod& method,
                             double dominance_margin) {
  const auto n = sys.rhs.size();
  GenericSolution sol;
  if (method.kind == SolveMethod::Kind::Direct) {
    Eigen::MatrixXcd M = sys.coupling;
    M.diagonal().array() += 1.0;
    sol.x = M.partialPivLu().solve(sys.rhs);
    if (!sol.x.allFinite()) throw std::runtime_error("singular system matrix");
  } else {
    // x^0 is the Born term; x^{n+1} = rhs - B x^n.
    Eigen::VectorXcd x = sys.rhs;
    bool converged = (n == 0);
    for (int it = 1; it <= method.max_iter; ++it) {
      Eigen::VectorXcd next = sys.rhs - sys.coupling * x;
      double change = (next - x).cwiseAbs().maxCoeff();
      double scale = next.cwiseAbs().maxCoeff();
      x = std::move(next);
      sol.iterations = it;
      if (change <= method.tol * std::max(scale, 1e-300)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "fixed-point iteration did not converge in " << method.max_iter
          << " steps (dominance margin " << dominance_margin << ")";
      throw std::runtime_error(msg.str());
    }
    sol.x = std::move(x);
  }
  sol.residual = relative_residual(sys, sol.x);
  return sol;
}

void require_outside(const Scene& scene, const Vec3& x) {
  for (const auto& body : scene.scatterers)
    if ((x - body.position).norm() < 0.5 * body.diameter)
      throw std::invalid_argument(
          "field evaluation point inside a body's bounding sphere");
}

}  // namespace

PlaneWave::PlaneWave(const Vec3& alpha, double wavenumber)
    : direction(alpha), k(wavenumber) {
  double len = alpha.norm();
  if (std::abs(len - 1.0) > 1e-6)
    throw std::invalid_argument("plane-wave direction must be a unit vector");
  direction /= len;
  if (k <= 0.0) throw std::invalid_argument("wavenumber must be positive");
}

Complex PlaneWave::value(const Vec3& x) const {
  return std::exp(kImagUnit * (k * direction.dot(x)));
}

Eigen::Vector3cd PlaneWave::gradient(const Vec3& x) const {
  return (kImagUnit * k * value(x)) * direction;
}

Complex helmholtz_kernel(const Vec3& x, const Vec3& y, double k) {
  double r = (x - y).norm();
  return std::exp(kImagUnit * (k * r)) / (4.0 * M_PI * r);
}

Eigen::Vector3cd helmholtz_kernel_gradient_x(const Vec3& x, const Vec3& y,
                                             double k) {
  Vec3 d = x - y;
  double r = d.norm();
  Complex g = std::exp(kImagUnit * (k * r)) / (4.0 * M_PI * r);
  return g * (kImagUnit * k - 1.0 / r) * (d / r);
}

Complex Scatterer::effective_capacitance() const {
  if (condition == BoundaryKind::Impedance)
    return impedance_capacitance(capacitance, zeta, area);
  return capacitance;
}

Scatterer make_scatterer(std::shared_ptr<const TriangleMesh> mesh,
                         const Vec3& position, BoundaryKind condition,
                         Complex zeta, int capacitance_order) {
  if (!mesh) throw std::invalid_argument("make_scatterer: null mesh");
  Scatterer s;
  s.position = position;
  s.condition = condition;
  s.zeta = zeta;
  GeometrySummary geom = summarize(*mesh);
  s.area = geom.area;
  s.volume = geom.volume;
  s.diameter = geom.diameter;
  if (condition == BoundaryKind::Neumann) {
    s.beta = magnetic_polarizability(*mesh).entries;
  } else {
    s.capacitance = capacitance(*mesh, capacitance_order).value;
  }
  s.mesh = std::move(mesh);
  return s;
}

void Scene::validate() const {
  if (scatterers.empty()) throw std::invalid_argument("empty scene");
  if (k <= 0.0) throw std::invalid_argument("wavenumber must be positive");
  for (std::size_t m = 0; m < scatterers.size(); ++m)
    for (std::size_t j = m + 1; j < scatterers.size(); ++j) {
      double dist = (scatterers[m].position - scatterers[j].position).norm();
      if (dist <= 0.0)
        throw std::invalid_argument("coincident reference points");
      if (dist <= 0.5 * (scatterers[m].diameter + scatterers[j].diameter))
        throw std::invalid_argument("overlapping bodies (bounding spheres)");
    }
}

SceneValidity Scene::validity(bool em_regime) const {
  SceneValidity v;
  for (const auto& s : scatterers)
    v.max_diameter = std::max(v.max_diameter, s.diameter);
  v.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < scatterers.size(); ++m)
    for (std::size_t j = m + 1; j < scatterers.size(); ++j) {
      double gap = (scatterers[m].position - scatterers[j].position).norm() -
                   0.5 * (scatterers[m].diameter + scatterers[j].diameter);
      v.min_separation = std::min(v.min_separation, gap);
    }
  v.ka = k * v.max_diameter;
  v.a_over_d = std::isfinite(v.min_separation) && v.min_separation > 0.0
                   ? v.max_diameter / v.min_separation
                   : 0.0;
  v.kd = k * v.min_separation;
  std::ostringstream w;
  if (v.ka >= 0.2) {
    w.str("");
    w << "ka = " << v.ka << " outside the small-body regime (ka < 0.2)";
    v.warnings.push_back(w.str());
  }
  if (v.a_over_d >= 0.2) {
    w.str("");
    w << "a/d = " << v.a_over_d << " outside the dilute regime (a/d < 0.2)";
    v.warnings.push_back(w.str());
  }
  if (em_regime && std::isfinite(v.kd) && v.kd < 2.0 * M_PI) {
    w.str("");
    w << "kd = " << v.kd << " below 2*pi: bodies closer than a wavelength "
      << "(EM regime needs d >> lambda)";
    v.warnings.push_back(w.str());
  }
  return v;
}

double diagonal_dominance_margin(const Scene& scene) {
  double mu = 0.0;
  const auto& bodies = scene.scatterers;
  for (std::size_t m = 0; m < bodies.size(); ++m) {
    if (bodies[m].condition == BoundaryKind::Neumann) continue;
    double row = 0.0;
    double cm = std::abs(bodies[m].effective_capacitance());
    for (std::size_t j = 0; j < bodies.size(); ++j) {
      if (j == m) continue;
      row += cm / (4.0 * M_PI *
                   (bodies[m].position - bodies[j].position).norm());
    }
    mu = std::max(mu, row);
  }
  return mu;
}

AssembledSystem assemble_dirichlet(const Scene& scene, const PlaneWave& wave) {
  scene.validate();
  const auto& bodies = scene.scatterers;
  const auto M = static_cast<Eigen::Index>(bodies.size());
  for (const auto& b : bodies) {
    if (b.condition == BoundaryKind::Neumann)
      throw std::invalid_argument(
          "Neumann body in the charge system; mixed boundary conditions "
          "are unsupported");
    if (b.capacitance <= 0.0)
      throw std::invalid_argument("scatterer is missing its capacitance");
  }
  AssembledSystem sys;
  sys.coupling = Eigen::MatrixXcd::Zero(M, M);
  sys.rhs.resize(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    Complex cm = bodies[m].effective_capacitance();
    for (Eigen::Index j = 0; j < M; ++j) {
      if (j == m) continue;
      sys.coupling(m, j) =
          cm * helmholtz_kernel(bodies[m].position, bodies[j].position,
                                scene.k);
    }
    sys.rhs(m) = -cm * wave.value(bodies[m].position);
  }
  return sys;
}

ChargeSolution solve_charges(const AssembledSystem& system,
                             const SolveMethod& method,
                             double dominance_margin) {
  GenericSolution g = solve_system(system, method, dominance_margin);
  ChargeSolution sol;
  sol.charges = std::move(g.x);
  sol.residual = g.residual;
  sol.method = method.kind;
  sol.iterations = g.iterations;
  return sol;
}

Complex field_dirichlet(const ChargeSolution& solution, const Scene& scene,
                        const PlaneWave& wave, const Vec3& x) {
  require_outside(scene, x);
  Complex u = wave.value(x);
  for (Eigen::Index m = 0; m < solution.charges.size(); ++m)
    u += helmholtz_kernel(x, scene.scatterers[m].position, scene.k) *
         solution.charges(m);
  return u;
}

Complex amplitude_dirichlet(const ChargeSolution& solution, const Scene& scene,
                            const Vec3& alpha_prime) {
  Complex a = 0.0;
  for (Eigen::Index m = 0; m < solution.charges.size(); ++m)
    a += solution.charges(m) / (4.0 * M_PI) *
         std::exp(-kImagUnit *
                  (scene.k * alpha_prime.dot(scene.scatterers[m].position)));
  return a;
}

AssembledSystem assemble_neumann(const Scene& scene, const PlaneWave& wave) {
  scene.validate();
  const auto& bodies = scene.scatterers;
  const auto M = static_cast<Eigen::Index>(bodies.size());
  for (const auto& b : bodies) {
    if (b.condition != BoundaryKind::Neumann)
      throw std::invalid_argument(
          "non-Neumann body in the Neumann system; mixed boundary "
          "conditions are unsupported");
    if (b.volume <= 0.0)
      throw std::invalid_argument("scatterer is missing its volume");
  }
  const double k = scene.k;
  AssembledSystem sys;
  sys.coupling = Eigen::MatrixXcd::Zero(4 * M, 4 * M);
  sys.rhs.resize(4 * M);
  for (Eigen::Index m = 0; m < M; ++m) {
    sys.rhs(4 * m) = -k * k * wave.value(bodies[m].position);
    Eigen::Vector3cd g0 = wave.gradient(bodies[m].position);
    sys.rhs.segment<3>(4 * m + 1) = g0;
    for (Eigen::Index j = 0; j < M; ++j) {
      if (j == m) continue;
      Vec3 rij = bodies[m].position - bodies[j].position;
      Vec3 e_hat = rij.normalized();
      Complex g = helmholtz_kernel(bodies[m].position, bodies[j].position, k);
      Eigen::Vector3cd grad_g = helmholtz_kernel_gradient_x(
          bodies[m].position, bodies[j].position, k);
      // Bracket [L_j + ik (e_hat . beta_j G_j)] as a row over (L, G).
      Eigen::RowVector4cd bracket;
      bracket(0) = 1.0;
      Eigen::RowVector3d w = e_hat.transpose() * bodies[j].beta;
      bracket.segment<3>(1) = kImagUnit * k * w.cast<Complex>();
      double Vj = bodies[j].volume;
      // L row: L_m = L0_m - k^2 g V_j [..]  =>  B = +k^2 g V_j [..]
      sys.coupling.block<1, 4>(4 * m, 4 * j) = (k * k) * g * Vj * bracket;
      // G rows: G_m = G0_m + grad g V_j [..]  =>  B = -grad g V_j [..]
      sys.coupling.block<3, 4>(4 * m + 1, 4 * j) =
          -(grad_g * Vj) * bracket;
    }
  }
  return sys;
}

NeumannSolution solve_neumann(const Scene& scene,
                              const AssembledSystem& system,
                              const SolveMethod& method) {
  GenericSolution g = solve_system(system, method, 0.0);
  const auto M = static_cast<Eigen::Index>(scene.scatterers.size());
  NeumannSolution sol;
  sol.laplacians.resize(M);
  sol.gradients.resize(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    sol.laplacians(m) = g.x(4 * m);
    sol.gradients[m] = g.x.segment<3>(4 * m + 1);
  }
  sol.residual = g.residual;
  sol.method = method.kind;
  sol.iterations = g.iterations;
  return sol;
}

namespace {

// [L_m + ik sum_pq beta_pq (G_m)_q e_p] for a given radiation direction.
Complex neumann_bracket(const Scatterer& body, const NeumannSolution& sol,
                        Eigen::Index m, const Vec3& e_hat, double k) {
  Eigen::Vector3d w = body.beta.transpose() * e_hat;
  Complex bracket = sol.laplacians(m);
  for (int q = 0; q < 3; ++q)
    bracket += kImagUnit * k * w(q) * sol.gradients[m](q);
  return bracket;
}

}  // namespace

Complex field_neumann(const NeumannSolution& solution, const Scene& scene,
                      const PlaneWave& wave, const Vec3& x) {
  require_outside(scene, x);
  const double k = scene.k;
  Complex u = wave.value(x);
  for (Eigen::Index m = 0;
       m < static_cast<Eigen::Index>(scene.scatterers.size()); ++m) {
    const auto& body = scene.scatterers[m];
    Vec3 e_hat = (x - body.position).normalized();
    u += helmholtz_kernel(x, body.position, k) * body.volume *
         neumann_bracket(body, solution, m, e_hat, k);
  }
  return u;
}

Complex amplitude_neumann(const NeumannSolution& solution, const Scene& scene,
                          const Vec3& alpha_prime) {
  const double k = scene.k;
  Complex a = 0.0;
  for (Eigen::Index m = 0;
       m < static_cast<Eigen::Index>(scene.scatterers.size()); ++m) {
    const auto& body = scene.scatterers[m];
    Complex bracket = neumann_bracket(body, solution, m, alpha_prime, k);
    a += body.volume / (4.0 * M_PI) * bracket *
         std::exp(-kImagUnit * (k * alpha_prime.dot(body.position)));
  }
  return a;
}

}  // namespace smallbody
