// em.hpp -- electromagnetic single-scattering by small bodies: 6x6
// scattering-matrix action, effective magnetic tensor, far-field sum.
// Incident-field (Born) approximation: the caller supplies the field at
// each body; the self-consistent multi-body EM system is out of scope.

#pragma once

#include "smallbody/mesh.hpp"
#include "smallbody/potential.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace smallbody {

struct EMField6 {
  Eigen::Vector3cd E = Eigen::Vector3cd::Zero();
  Eigen::Vector3cd H = Eigen::Vector3cd::Zero();
};

struct EMBody {
  double volume = 0.0;                                // V_m
  Eigen::Matrix3d alpha = Eigen::Matrix3d::Zero();     // electric, alpha(gamma)
  Eigen::Matrix3d beta_tilde = Eigen::Matrix3d::Zero(); // alpha(gamma~) + beta
  Vec3 position = Vec3::Zero();
  double eps0 = 1.0;  // background medium
  double mu0 = 1.0;
};

/// Material contrast (eps - eps0)/(eps + eps0); -1 at eps = 0, +1 in the
/// conductor limit.
std::complex<double> gamma_contrast(std::complex<double> eps_or_mu,
                                    std::complex<double> background);

/// Effective magnetic tensor beta~ = alpha(gamma~) + beta with
/// gamma~ = (mu - mu0)/(mu + mu0). Real contrast only.
PolarizabilityTensor beta_tilde(const TriangleMesh& mesh, double mu,
                                double mu0);

/// Action of the single-body 6x6 scattering matrix on an incident
/// 6-vector, including the k^2 V / (4 pi) prefactor. theta_prime is the
/// scattered direction; the E output is transverse to it by construction.
EMField6 apply_scattering_matrix(const EMBody& body, const Vec3& theta_prime,
                                 const EMField6& incident, double k);

/// Far-field 6-vector amplitude: sum over bodies of the scattering-matrix
/// action on the local incident field, phased by exp(-ik theta'.x_m).
EMField6 em_amplitude(const std::vector<EMBody>& bodies,
                      const std::vector<EMField6>& incident_at_bodies,
                      const Vec3& theta_prime, double k);

/// Plane-wave triad: E = pol * exp(ik theta.x),
/// H = sqrt(eps0/mu0) theta x E. Requires theta.pol = 0.
EMField6 em_plane_wave(const Vec3& theta, const Eigen::Vector3cd& polarization,
                       double k, double eps0, double mu0, const Vec3& x);

}  // namespace smallbody
