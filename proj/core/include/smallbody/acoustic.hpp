// acoustic.hpp -- multi-body acoustic scattering reduced to small linear
// systems: M x M for Dirichlet/impedance charges, 4M x 4M for the Neumann
// (Delta u, grad u) unknowns, with field and far-field evaluators.

#pragma once

#include "smallbody/mesh.hpp"
#include "smallbody/potential.hpp"

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <optional>
#include <vector>

namespace smallbody {

using Complex = std::complex<double>;

/// Incident plane wave u0 = exp(i k alpha . x).
struct PlaneWave {
  Vec3 direction;  // alpha, unit
  double k = 0.0;

  PlaneWave(const Vec3& alpha, double wavenumber);

  Complex value(const Vec3& x) const;
  Eigen::Vector3cd gradient(const Vec3& x) const;  // i k alpha u0
};

/// Outgoing Helmholtz kernel g(x,y) = exp(ik|x-y|)/(4 pi |x-y|).
Complex helmholtz_kernel(const Vec3& x, const Vec3& y, double k);
Eigen::Vector3cd helmholtz_kernel_gradient_x(const Vec3& x, const Vec3& y,
                                             double k);

enum class BoundaryKind { Dirichlet, Impedance, Neumann };

/// One small body: reference point, boundary condition and the shape
/// properties the linear systems consume. Bodies built from a mesh carry
/// it for field validity checks; tests may inject properties directly.
struct Scatterer {
  Vec3 position = Vec3::Zero();  // x_m
  BoundaryKind condition = BoundaryKind::Dirichlet;
  Complex zeta = 0.0;  // impedance only

  double capacitance = 0.0;  // C_m (Dirichlet/impedance)
  double area = 0.0;         // |S_m|
  double volume = 0.0;       // V_m (Neumann)
  Eigen::Matrix3d beta = Eigen::Matrix3d::Zero();  // Neumann only
  double diameter = 0.0;

  std::shared_ptr<const TriangleMesh> mesh;  // optional

  /// C_m, or C_{m zeta} for impedance bodies.
  Complex effective_capacitance() const;
};

/// Build a scatterer from a mesh: computes C (given capacitance order),
/// area, volume, diameter, and beta for Neumann bodies.
Scatterer make_scatterer(std::shared_ptr<const TriangleMesh> mesh,
                         const Vec3& position, BoundaryKind condition,
                         Complex zeta = 0.0, int capacitance_order = 2);

struct SceneValidity {
  double max_diameter = 0.0;         // a
  double min_separation = 0.0;       // d (surface-to-surface, bounding spheres)
  double ka = 0.0;
  double a_over_d = 0.0;
  double kd = 0.0;
  std::vector<std::string> warnings;
};

struct Scene {
  std::vector<Scatterer> scatterers;
  double k = 0.0;

  /// Throws on empty scene, coincident reference points, or overlapping
  /// bounding spheres.
  void validate() const;
  /// Regime diagnostics with advisory warnings (ka, a/d thresholds 0.2;
  /// kd < 2 pi flagged for EM use).
  SceneValidity validity(bool em_regime = false) const;
};

/// Solvability/iterability screen: mu = max_m sum_{j != m}
/// |C_m^eff| / (4 pi |x_m - x_j|). Below 1 the charge system is
/// diagonally dominant and the fixed-point iteration contracts.
double diagonal_dominance_margin(const Scene& scene);

struct SolveMethod {
  enum class Kind { Direct, FixedPoint };
  Kind kind = Kind::Direct;
  double tol = 1e-12;
  int max_iter = 200;

  static SolveMethod direct() { return {}; }
  static SolveMethod fixed_point(double tol = 1e-12, int max_iter = 200) {
    return {Kind::FixedPoint, tol, max_iter};
  }
};

/// Linear system (I + B) x = rhs; `coupling` holds B.
struct AssembledSystem {
  Eigen::MatrixXcd coupling;
  Eigen::VectorXcd rhs;
};

struct ChargeSolution {
  Eigen::VectorXcd charges;  // Q_m
  double residual = 0.0;     // max relative residual
  SolveMethod::Kind method = SolveMethod::Kind::Direct;
  int iterations = 0;
};

struct NeumannSolution {
  Eigen::VectorXcd laplacians;            // L_m = Delta u(x_m)
  std::vector<Eigen::Vector3cd> gradients;  // G_m = grad u(x_m)
  double residual = 0.0;
  SolveMethod::Kind method = SolveMethod::Kind::Direct;
  int iterations = 0;
};

/// Charge system: Q_m = C_m^eff(-u0(x_m) - sum_{j!=m} g(x_m,x_j) Q_j),
/// assembled as (I + B) Q = -c with B_mj = C_m^eff g(x_m, x_j).
AssembledSystem assemble_dirichlet(const Scene& scene, const PlaneWave& wave);

ChargeSolution solve_charges(const AssembledSystem& system,
                             const SolveMethod& method,
                             double dominance_margin = 0.0);

Complex field_dirichlet(const ChargeSolution& solution, const Scene& scene,
                        const PlaneWave& wave, const Vec3& x);

Complex amplitude_dirichlet(const ChargeSolution& solution, const Scene& scene,
                            const Vec3& alpha_prime);

/// 4M x 4M system for (L_m, G_m); per-body unknown blocks
/// (L, Gx, Gy, Gz).
AssembledSystem assemble_neumann(const Scene& scene, const PlaneWave& wave);

NeumannSolution solve_neumann(const Scene& scene,
                              const AssembledSystem& system,
                              const SolveMethod& method);

Complex field_neumann(const NeumannSolution& solution, const Scene& scene,
                      const PlaneWave& wave, const Vec3& x);

Complex amplitude_neumann(const NeumannSolution& solution, const Scene& scene,
                          const Vec3& alpha_prime);

}  // namespace smallbody
