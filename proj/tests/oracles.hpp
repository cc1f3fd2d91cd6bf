#pragma once

// Reference computations for the tests. Nothing here calls into the library's
// numerics; matrices are built from ladder operators and exponentiated by
// plain power series.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using M3 = Eigen::Matrix3cd;
using M9 = Eigen::Matrix<cplx, 9, 9>;

/// Scaling-and-squaring Taylor series.
template <class M>
M expm(const M& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::ldexp(1.0, s) > 0.25) ++s;
  const M b = a / std::ldexp(1.0, s);
  M term = M::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

struct Spin1 {
  M3 jx, jy, jz;
};

/// |1,+1>, |1,0>, |1,-1> with <m+1|J+|m> = sqrt(2).
inline Spin1 spin1() {
  M3 jp = M3::Zero();
  jp(0, 1) = jp(1, 2) = std::sqrt(2.0);
  const M3 jm = jp.adjoint();
  Spin1 s;
  s.jx = (jp + jm) / 2.0;
  s.jy = (jp - jm) / cplx(0, 2);
  s.jz = M3::Zero();
  s.jz(0, 0) = 1;
  s.jz(2, 2) = -1;
  return s;
}

inline M3 rotation(double alpha, double beta, double gamma) {
  const auto s = spin1();
  const cplx i(0, 1);
  return expm<M3>(-i * alpha * s.jz) * expm<M3>(-i * beta * s.jy) * expm<M3>(-i * gamma * s.jz);
}

inline M3 axis_rotation(double nx, double ny, double nz, double theta) {
  const auto s = spin1();
  return expm<M3>(cplx(0, -theta) * (nx * s.jx + ny * s.jy + nz * s.jz));
}

/// Column-stacking vec.
inline Eigen::Matrix<cplx, 9, 1> vec(const M3& m) {
  Eigen::Matrix<cplx, 9, 1> v;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) v(3 * c + r) = m(r, c);
  return v;
}

inline M3 unvec(const Eigen::Matrix<cplx, 9, 1>& v) {
  M3 m;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) m(r, c) = v(3 * c + r);
  return m;
}

/// Superoperator of a map, tabulated column by column.
template <class F>
M9 tabulate(F&& map) {
  M9 s;
  for (int k = 0; k < 9; ++k) {
    Eigen::Matrix<cplx, 9, 1> e = Eigen::Matrix<cplx, 9, 1>::Zero();
    e(k) = 1;
    s.col(k) = vec(map(unvec(e)));
  }
  return s;
}

inline M9 kron(const M3& a, const M3& b) {
  M9 k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
  return k;
}

/// Gauss-Hermite nodes/weights for weight e^{-t^2} via Golub-Welsch.
inline void gauss_hermite(int n, std::vector<double>& t, std::vector<double>& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  t.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    t[k] = es.eigenvalues()(k);
    w[k] = std::sqrt(M_PI) * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
}

/// Gauss-Legendre on [-1,1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    w[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
}

/// Jitter channel by direct quadrature: axis over the sphere (Gauss-Legendre
/// in cos theta x trapezoid in phi), angle N(0, gamma^2) by Gauss-Hermite.
inline M9 jitter_by_quadrature(double gamma) {
  std::vector<double> ct, wt, ht, hw;
  gauss_legendre(8, ct, wt);
  gauss_hermite(60, ht, hw);
  const int nphi = 12;
  M9 acc = M9::Zero();
  for (std::size_t a = 0; a < ct.size(); ++a) {
    const double st = std::sqrt(1.0 - ct[a] * ct[a]);
    for (int p = 0; p < nphi; ++p) {
      const double phi = 2 * M_PI * p / nphi;
      const double wa = wt[a] / 2.0 / nphi;
      for (std::size_t h = 0; h < ht.size(); ++h) {
        const double theta = std::sqrt(2.0) * gamma * ht[h];
        const M3 u = axis_rotation(st * std::cos(phi), st * std::sin(phi), ct[a], theta);
        const double wgt = wa * hw[h] / std::sqrt(M_PI);
        acc += wgt * kron(u.conjugate(), u);
      }
    }
  }
  return acc;
}

/// Complex Gaussian vector, normalized.
template <class Rng>
Eigen::Vector3cd haar_vector(Rng& rng) {
  std::normal_distribution<double> n;
  Eigen::Vector3cd v;
  for (int i = 0; i < 3; ++i) v(i) = cplx(n(rng), n(rng));
  return v.normalized();
}

inline M3 apply(const M9& s, const M3& rho) { return unvec(s * vec(rho)); }

inline Eigen::Vector3d fiducial(double x) { return {std::sqrt(x), 0.0, std::sqrt(1.0 - x)}; }

/// Gram matrix over the Euler-angle Haar measure as a 9x9 complex matrix in
/// the matrix-unit basis. Spectrum is basis independent.
inline M9 gram_by_quadrature(double x, int nb, int na) {
  std::vector<double> cb, wb;
  gauss_legendre(nb, cb, wb);
  const Eigen::Vector3cd psi = fiducial(x).cast<cplx>();
  M9 acc = M9::Zero();
  for (int b = 0; b < nb; ++b)
    for (int a = 0; a < na; ++a)
      for (int g = 0; g < na; ++g) {
        const M3 u = rotation(2 * M_PI * a / na, std::acos(cb[b]), 2 * M_PI * g / na);
        const Eigen::Vector3cd phi = u * psi;
        const auto v = vec(phi * phi.adjoint());
        acc += (wb[b] / 2.0 / na / na) * v * v.adjoint();
      }
  return acc;
}

inline Eigen::VectorXd sorted_spectrum(const M9& m) {
  Eigen::SelfAdjointEigenSolver<M9> es(m);
  return es.eigenvalues();
}

}  // namespace oracle
