#include "biphoton/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace biphoton {

Vec9 vec(const Mat3& m) {
  Vec9 v;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) v(r + 3 * c) = m(r, c);
  return v;
}

Mat3 unvec(const Vec9& v) {
  Mat3 m;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) m(r, c) = v(r + 3 * c);
  return m;
}

Mat9 kron(const Mat3& a, const Mat3& b) {
  Mat9 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
  return out;
}

Mat3 hermitian_part(const Mat3& m) { return 0.5 * (m + m.adjoint()); }
Mat9 hermitian_part(const Mat9& m) { return 0.5 * (m + m.adjoint()); }

double max_abs_diff(const Mat3& a, const Mat3& b) { return (a - b).cwiseAbs().maxCoeff(); }
double max_abs_diff(const Mat9& a, const Mat9& b) { return (a - b).cwiseAbs().maxCoeff(); }

Mat3 sqrt_psd(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(hermitian_part(m));
  Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Mat3 inv_sqrt_pd(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(hermitian_part(m));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("inv_sqrt_pd: matrix is not positive definite");
  Eigen::Vector3d ev = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::Vector3d hermitian_eigenvalues(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Eigen::Matrix<double, 9, 1> hermitian_eigenvalues(const Mat9& m) {
  Eigen::SelfAdjointEigenSolver<Mat9> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    gl.nodes[i] = -z;
    gl.nodes[n - 1 - i] = z;
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

namespace {

std::array<Mat3, 9> make_operator_basis() {
  std::array<Mat3, 9> b;
  for (auto& m : b) m.setZero();
  b[0] = Mat3::Identity() / std::sqrt(3.0);
  const double s = 1.0 / std::sqrt(2.0);
  int k = 1;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      b[k](i, j) = s;
      b[k](j, i) = s;
      ++k;
      b[k](i, j) = -kI * s;
      b[k](j, i) = kI * s;
      ++k;
    }
  }
  b[7].diagonal() << s, -s, 0.0;
  const double t = 1.0 / std::sqrt(6.0);
  b[8].diagonal() << t, t, -2.0 * t;
  return b;
}

std::vector<Mat9> make_operator_basis_9() {
  std::vector<Mat9> b;
  b.reserve(81);
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 9; ++i) {
    Mat9 m = Mat9::Zero();
    m(i, i) = 1.0;
    b.push_back(m);
  }
  for (int i = 0; i < 9; ++i) {
    for (int j = i + 1; j < 9; ++j) {
      Mat9 re = Mat9::Zero();
      re(i, j) = s;
      re(j, i) = s;
      b.push_back(re);
      Mat9 im = Mat9::Zero();
      im(i, j) = -kI * s;
      im(j, i) = kI * s;
      b.push_back(im);
    }
  }
  return b;
}

}  // namespace

const std::array<Mat3, 9>& operator_basis() {
  static const std::array<Mat3, 9> basis = make_operator_basis();
  return basis;
}

RealVec9 operator_coordinates(const Mat3& m) {
  const auto& b = operator_basis();
  RealVec9 c;
  for (int a = 0; a < 9; ++a) c(a) = (b[a] * m).trace().real();
  return c;
}

Mat3 operator_from_coordinates(const RealVec9& c) {
  const auto& b = operator_basis();
  Mat3 m = Mat3::Zero();
  for (int a = 0; a < 9; ++a) m += c(a) * b[a];
  return m;
}

const std::vector<Mat9>& operator_basis_9() {
  static const std::vector<Mat9> basis = make_operator_basis_9();
  return basis;
}

}  // namespace biphoton
