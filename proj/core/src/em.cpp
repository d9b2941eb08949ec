#include "smallbody/em.hpp"

#include <cmath>

namespace smallbody {

namespace {

// Cross product of a real direction with a complex field. Eigen's cross()
// conjugates complex operands, which would break complex linearity.
Eigen::Vector3cd cross_real(const Vec3& a, const Eigen::Vector3cd& b) {
  return {a.y() * b.z() - a.z() * b.y(),
          a.z() * b.x() - a.x() * b.z(),
          a.x() * b.y() - a.y() * b.x()};
}

}  // namespace

std::complex<double> gamma_contrast(std::complex<double> eps_or_mu,
                                    std::complex<double> background) {
  std::complex<double> den = eps_or_mu + background;
  if (den == std::complex<double>(0.0, 0.0))
    throw std::invalid_argument("contrast denominator eps + eps0 is zero");
  return (eps_or_mu - background) / den;
}

PolarizabilityTensor beta_tilde(const TriangleMesh& mesh, double mu,
                                double mu0) {
  std::complex<double> gt = gamma_contrast(mu, mu0);
  PolarizabilityTensor beta = magnetic_polarizability(mesh);
  PolarizabilityTensor result;
  result.kind = PolarizabilityTensor::Kind::Magnetic;
  result.gamma = gt.real();
  result.entries =
      electric_polarizability(mesh, gt.real()).entries + beta.entries;
  return result;
}

EMField6 apply_scattering_matrix(const EMBody& body, const Vec3& theta_prime,
                                 const EMField6& incident, double k) {
  if (std::abs(theta_prime.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("theta_prime must be a unit vector");
  const Eigen::Vector3cd aE = body.alpha * incident.E;
  const Eigen::Vector3cd bH = body.beta_tilde * incident.H;
  const Eigen::Vector3cd t = theta_prime.cast<std::complex<double>>();
  const double z = std::sqrt(body.mu0 / body.eps0);  // wave impedance
  const double pre = k * k * body.volume / (4.0 * M_PI);

  EMField6 out;
  // Upper row: transverse projection of alpha E minus the magnetic
  // cross-product term; lower row mirrors it.
  out.E = pre * ((aE - t * t.dot(aE)) -
                 body.mu0 * z * cross_real(theta_prime, bH));
  out.H = pre * ((1.0 / z) * cross_real(theta_prime, aE) +
                 body.mu0 * (bH - t * t.dot(bH)));
  return out;
}

EMField6 em_amplitude(const std::vector<EMBody>& bodies,
                      const std::vector<EMField6>& incident_at_bodies,
                      const Vec3& theta_prime, double k) {
  if (bodies.size() != incident_at_bodies.size())
    throw std::invalid_argument("bodies/fields length mismatch");
  EMField6 total;
  for (std::size_t m = 0; m < bodies.size(); ++m) {
    EMField6 s =
        apply_scattering_matrix(bodies[m], theta_prime,
                                incident_at_bodies[m], k);
    std::complex<double> phase = std::exp(
        std::complex<double>(0.0, -k * theta_prime.dot(bodies[m].position)));
    total.E += phase * s.E;
    total.H += phase * s.H;
  }
  return total;
}

EMField6 em_plane_wave(const Vec3& theta, const Eigen::Vector3cd& polarization,
                       double k, double eps0, double mu0, const Vec3& x) {
  if (std::abs(theta.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("incident direction must be a unit vector");
  if (std::abs(theta.cast<std::complex<double>>().dot(polarization)) >
      1e-9 * polarization.norm())
    throw std::invalid_argument(
        "polarization must be orthogonal to the propagation direction");
  EMField6 f;
  std::complex<double> phase =
      std::exp(std::complex<double>(0.0, k * theta.dot(x)));
  f.E = phase * polarization;
  f.H = std::sqrt(eps0 / mu0) * cross_real(theta, f.E);
  return f;
}

}  // namespace smallbody
