#pragma once

// Small fixed-size complex linear algebra used throughout: the spin-1 space is
// 3-dimensional, operators on it live in a 9-dimensional Hilbert-Schmidt space.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace biphoton {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

using Vec3 = Eigen::Matrix<cplx, 3, 1>;
using Mat3 = Eigen::Matrix<cplx, 3, 3>;
using Mat2 = Eigen::Matrix<cplx, 2, 2>;
using Vec9 = Eigen::Matrix<cplx, 9, 1>;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;
using RealVec9 = Eigen::Matrix<double, 9, 1>;
using RealMat9 = Eigen::Matrix<double, 9, 9>;

/// Column-stacking vectorization: index = row + 3 * col.
Vec9 vec(const Mat3& m);
Mat3 unvec(const Vec9& v);

/// Kronecker product, (A⊗B)[(i*3+k),(j*3+l)] = A(i,j) B(k,l).
Mat9 kron(const Mat3& a, const Mat3& b);

Mat3 hermitian_part(const Mat3& m);
Mat9 hermitian_part(const Mat9& m);

/// Largest entrywise modulus of (a - b).
double max_abs_diff(const Mat3& a, const Mat3& b);
double max_abs_diff(const Mat9& a, const Mat9& b);

/// Square root of a Hermitian PSD matrix; eigenvalues below zero are clipped.
Mat3 sqrt_psd(const Mat3& m);

/// Inverse square root of a Hermitian positive-definite 3x3 matrix.
Mat3 inv_sqrt_pd(const Mat3& m);

/// Ascending eigenvalues of the Hermitian part.
Eigen::Vector3d hermitian_eigenvalues(const Mat3& m);
Eigen::Matrix<double, 9, 1> hermitian_eigenvalues(const Mat9& m);

/// Euclidean projection of a real vector onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

/// Orthonormal Hermitian basis of 3x3 operators: 1l/√3 first, then the eight
/// Gell-Mann matrices scaled by 1/√2.
const std::array<Mat3, 9>& operator_basis();

/// Real coordinates Tr(B_a m) of a Hermitian operator in operator_basis().
RealVec9 operator_coordinates(const Mat3& m);
Mat3 operator_from_coordinates(const RealVec9& c);

/// Orthonormal Hermitian basis of 9x9 operators (81 elements).
const std::vector<Mat9>& operator_basis_9();

/// Pairwise (tree) summation over [0, n) with a fixed reduction order.
template <typename T, typename F>
T pairwise_sum(std::size_t begin, std::size_t end, const F& term) {
  if (end - begin == 1) return term(begin);
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum<T>(begin, mid, term) + pairwise_sum<T>(mid, end, term);
}

}  // namespace biphoton
