// potential.hpp -- electrostatic shape properties of a single body:
// capacitance series, double-layer operator, polarizability tensors.
//
// Units are Gaussian with eps0 = 1 and the normalization in which the
// capacitance of a sphere of radius a equals 4*pi*a.

#pragma once

#include "smallbody/mesh.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>

namespace smallbody {

struct CapacitanceResult {
  int order = 0;
  double value = 0.0;               // C^(order)
  std::vector<double> series;       // C^(0) .. C^(order)
  std::optional<double> estimated_ratio;  // from consecutive differences
  bool divergence_warning = false;
};

/// J = double surface integral of 1/|s-t| over S x S. 16*pi^2 for the unit
/// sphere. Singular self and near pairs use the analytic flat-panel
/// potential; far pairs use Gauss product rules graded by separation.
double inverse_distance_double_integral(const TriangleMesh& mesh);

/// Capacitance series C^(0)..C^(n). Orders above 0 apply the discretized
/// normal-derivative kernel n times to the panel vector and contract with
/// the 1/r pair integrals. n <= 4.
CapacitanceResult capacitance(const TriangleMesh& mesh, int n);

/// Dense double-layer matrix: A[i][j] = integral over panel j of
/// d/dN_t 1/(2*pi*|c_i - t|) dt at collocation point c_i. The diagonal is
/// chosen so every row sums to -1 exactly (discrete Gauss identity).
Eigen::MatrixXd double_layer_operator(const TriangleMesh& mesh);

struct PolarizabilityTensor {
  enum class Kind { Electric, Magnetic };
  Eigen::Matrix3d entries = Eigen::Matrix3d::Zero();
  Kind kind = Kind::Electric;
  double gamma = 0.0;  // contrast parameter; -1 for the magnetic kind
};

/// Piecewise-constant surface densities, one value per panel; columns are
/// the three solutions sigma^(q), q = x,y,z.
using SurfaceDensities = Eigen::MatrixXd;

/// Magnetic polarizability of a perfect conductor: solve
/// (I - A) sigma = -2 N_q and take the dipole moments about the centroid,
/// normalized by the volume. Sphere value: -(3/2) I.
PolarizabilityTensor magnetic_polarizability(const TriangleMesh& mesh);

/// Electric polarizability for dielectric contrast gamma in [-1, 1]:
/// (I + gamma A) sigma = 2 gamma N_q. gamma = -1 reproduces the magnetic
/// tensor; gamma = +1 on the unit sphere gives 3 I; gamma = 0 gives 0.
PolarizabilityTensor electric_polarizability(const TriangleMesh& mesh,
                                             double gamma);

/// As above, also exposing the solved densities (for diagnostics/tests).
PolarizabilityTensor electric_polarizability(const TriangleMesh& mesh,
                                             double gamma,
                                             SurfaceDensities* densities);

/// Effective capacitance under the impedance boundary condition:
/// C / (1 + C/(zeta * area)).
std::complex<double> impedance_capacitance(double capacitance,
                                           std::complex<double> zeta,
                                           double area);

}  // namespace smallbody
