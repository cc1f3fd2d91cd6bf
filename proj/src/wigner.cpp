#include <cmath>

#include "biphoton/errors.hpp"
#include "biphoton/spinspace.hpp"

namespace biphoton {

const std::array<TensorIndex, 9>& tensor_indices() {
  static const std::array<TensorIndex, 9> idx{{{0, 0}, {1, -1}, {1, 0}, {1, 1}, {2, -2}, {2, -1}, {2, 0}, {2, 1}, {2, 2}}};
  return idx;
}

const std::array<Mat3, 9>& tensor_operators() {
  static const std::array<Mat3, 9> ops = [] {
    const auto& j = spin_operators();
    const Mat3 jp = j.jx + kI * j.jy;
    const Mat3 jm = j.jx - kI * j.jy;
    const Mat3 id = Mat3::Identity();
    // Cartesian forms proportional (with positive constants) to Y_kq(J).
    std::array<Mat3, 9> t{
        id,
        jm,
        j.jz,
        -jp,
        jm * jm,
        j.jz * jm + jm * j.jz,
        3.0 * j.jz * j.jz - 2.0 * id,
        -(j.jz * jp + jp * j.jz),
        jp * jp,
    };
    for (auto& m : t) m /= std::sqrt((m.adjoint() * m).trace().real());
    return t;
  }();
  return ops;
}

cplx spherical_harmonic(int k, int q, double theta, double phi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const cplx e1 = std::exp(kI * phi), e2 = std::exp(2.0 * kI * phi);
  const double pi = kPi;
  switch (k * 10 + (q + 2)) {
    case 2:  // (0, 0)
      return 0.5 / std::sqrt(pi);
    case 11:  // (1, -1)
      return std::sqrt(3.0 / (8.0 * pi)) * st * std::conj(e1);
    case 12:  // (1, 0)
      return std::sqrt(3.0 / (4.0 * pi)) * ct;
    case 13:  // (1, 1)
      return -std::sqrt(3.0 / (8.0 * pi)) * st * e1;
    case 20:
      return std::sqrt(15.0 / (32.0 * pi)) * st * st * std::conj(e2);
    case 21:
      return std::sqrt(15.0 / (8.0 * pi)) * st * ct * std::conj(e1);
    case 22:
      return std::sqrt(5.0 / (16.0 * pi)) * (3.0 * ct * ct - 1.0);
    case 23:
      return -std::sqrt(15.0 / (8.0 * pi)) * st * ct * e1;
    case 24:
      return std::sqrt(15.0 / (32.0 * pi)) * st * st * e2;
    default:
      throw DomainError("spherical_harmonic: only k <= 2, |q| <= k supported");
  }
}

namespace {

std::array<cplx, 9> multipoles(const DensityMatrix& rho) {
  const auto& t = tensor_operators();
  std::array<cplx, 9> out;
  for (int i = 0; i < 9; ++i) out[i] = (rho.matrix() * t[i].adjoint()).trace();
  return out;
}

double wigner_from_multipoles(const std::array<cplx, 9>& rho_kq, double theta, double phi) {
  const auto& idx = tensor_indices();
  cplx w = 0.0;
  for (int i = 0; i < 9; ++i) w += rho_kq[i] * spherical_harmonic(idx[i].k, idx[i].q, theta, phi);
  return std::sqrt(3.0 / (4.0 * kPi)) * w.real();
}

}  // namespace

double wigner_value(const DensityMatrix& rho, double theta, double phi) {
  return wigner_from_multipoles(multipoles(rho), theta, phi);
}

WignerGrid wigner_sphere(const DensityMatrix& rho, int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 2) throw DomainError("wigner_sphere: grid sizes must be >= 2");
  WignerGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  g.theta.resize(n_theta);
  g.phi.resize(n_phi);
  for (int i = 0; i < n_theta; ++i) g.theta[i] = kPi * i / (n_theta - 1);
  for (int j = 0; j < n_phi; ++j) g.phi[j] = 2.0 * kPi * j / n_phi;
  const auto rho_kq = multipoles(rho);
  g.values.resize(static_cast<std::size_t>(n_theta) * n_phi);
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_phi; ++j)
      g.values[static_cast<std::size_t>(i) * n_phi + j] = wigner_from_multipoles(rho_kq, g.theta[i], g.phi[j]);
  return g;
}

double integrate_sphere(const WignerGrid& grid) {
  // Clenshaw-Curtis in cos(theta) on the equispaced theta nodes
  const int n = grid.n_theta - 1;
  const double dphi = 2.0 * kPi / grid.n_phi;
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    double w = 1.0;
    for (int k = 1; 2 * k <= n; ++k) {
      const double b = (2 * k == n) ? 1.0 : 2.0;
      w -= b * std::cos(2.0 * k * grid.theta[i]) / (4.0 * k * k - 1.0);
    }
    w *= ((i == 0 || i == n) ? 1.0 : 2.0) / n;
    double ring = 0.0;
    for (int j = 0; j < grid.n_phi; ++j) ring += grid.at(i, j);
    total += w * ring;
  }
  return total * dphi;
}

}  // namespace biphoton
