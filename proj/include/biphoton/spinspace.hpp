#pragma once

// Spin-1 ("biphoton") state space.
//
// All vectors and matrices use the fixed basis order
//   index 0: |2,0>_{H,V} = |1,+1>
//   index 1: |1,1>_{H,V} = |1, 0>
//   index 2: |0,2>_{H,V} = |1,-1>
// with hbar = 1 and angles in radians.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "biphoton/linalg.hpp"
#include "biphoton/random.hpp"

namespace biphoton {

class PureState {
 public:
  /// Throws DomainError unless the vector is normalized within 1e-12.
  explicit PureState(const Vec3& amplitudes);
  /// Normalizes an arbitrary nonzero vector.
  static PureState normalized(const Vec3& v);

  const Vec3& amplitudes() const { return amps_; }
  cplx operator[](int i) const { return amps_(i); }

 private:
  Vec3 amps_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12), unit trace (1e-12) and eigenvalues >= -1e-10.
  explicit DensityMatrix(const Mat3& m);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed();
  /// For numerically produced operators (channel outputs, estimates): takes the
  /// Hermitian part and divides by the trace. Throws DomainError if the trace
  /// is off by more than trace_tol or an eigenvalue is below -psd_tol.
  static DensityMatrix renormalized(const Mat3& m, double trace_tol = 1e-6, double psd_tol = 1e-8);

  const Mat3& matrix() const { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }

  // Element names used by the indirect projection scheme.
  double a() const { return m_(0, 0).real(); }
  double b() const { return m_(1, 1).real(); }
  double c() const { return m_(2, 2).real(); }
  cplx d() const { return m_(0, 2); }
  cplx f() const { return m_(0, 1); }
  cplx g() const { return m_(1, 2); }

 private:
  struct Unchecked {};
  DensityMatrix(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

struct SpinOperators {
  Mat3 jx, jy, jz;
};
const SpinOperators& spin_operators();

/// Euler angles of the z-y-z convention, U = e^{-i alpha Jz} e^{-i beta Jy} e^{-i gamma Jz}.
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// An SU(2) element, kept both as its 2x2 spinor matrix and its spin-1 image.
class Su2Element {
 public:
  Su2Element();  // identity

  static Su2Element from_euler(double alpha, double beta, double gamma);
  static Su2Element from_euler(const EulerAngles& e) { return from_euler(e.alpha, e.beta, e.gamma); }
  /// Rotation by angle theta about the unit axis (nx, ny, nz).
  static Su2Element from_axis_angle(const Eigen::Vector3d& axis, double theta);
  /// Any 2x2 unitary with unit determinant (checked to 1e-10).
  static Su2Element from_spinor(const Mat2& s);

  const Mat2& spinor() const { return spinor_; }
  const Mat3& spin1() const { return u_; }
  /// Euler angles, either as constructed or recovered from the spinor.
  EulerAngles euler() const;

  Su2Element inverse() const;
  /// Group product: (a * b) acts as b first, then a.
  friend Su2Element operator*(const Su2Element& a, const Su2Element& b);

  /// Image of the +z axis under the rotation (where |1,+1> is sent).
  Eigen::Vector3d direction() const;

 private:
  Su2Element(const Mat2& s, std::optional<EulerAngles> e);
  Mat2 spinor_;
  Mat3 u_;
  std::optional<EulerAngles> euler_;
};

/// Symmetric-tensor-square lift of a single-photon 2x2 operator to the
/// two-photon space, derived from a_i^dagger -> sum_j W_ji a_j^dagger.
Mat3 lift_to_spin1(const Mat2& w);

Su2Element su2_from_euler(double alpha, double beta, double gamma);

/// Linear retarder. Retardance pi is a half-wave plate, pi/2 a quarter-wave plate.
struct WaveplateSpec {
  double retardance = kPi;
  double fast_axis = 0.0;
};

inline WaveplateSpec half_wave_plate(double fast_axis) { return {kPi, fast_axis}; }
inline WaveplateSpec quarter_wave_plate(double fast_axis) { return {kPi / 2.0, fast_axis}; }

/// Jones matrix R(t) diag(e^{-i delta/2}, e^{+i delta/2}) R(-t), fast axis first.
Mat2 jones_matrix(const WaveplateSpec& spec);

/// Waveplate acting collectively on both photons. With this convention a
/// half-wave plate at 22.5 degrees sends |1,1> to (-|2,0> + |0,2>)/sqrt(2) and
/// the plus-N00N state to minus itself.
Su2Element waveplate_su2(const WaveplateSpec& spec);

/// Isotropic depolarization weight mixing a state with 1l/3.
struct ImpurityModel {
  double epsilon = 0.0;
};

/// sqrt(x)|2,0> + sqrt(1-x)|0,2>.
PureState fiducial_state(double x);

/// x = 1/2 - 1/(2 sqrt 2), the fiducial whose SU(2) orbit is a 2-design.
inline double two_design_fiducial_x() { return 0.5 - 0.5 / std::sqrt(2.0); }

DensityMatrix rotate(const DensityMatrix& rho, const Su2Element& u);
PureState rotate(const PureState& psi, const Su2Element& u);

double purity(const DensityMatrix& rho);

/// Squared Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
/// Same, for raw Hermitian matrices; throws DomainError if either has an
/// eigenvalue below -psd_tol.
double fidelity(const Mat3& rho, const Mat3& sigma, double psd_tol = 1e-8);

PureState haar_random_state(std::uint64_t seed);
PureState haar_random_state(Rng& rng);

/// Haar-random SU(2) element (uniform on the group).
Su2Element haar_random_su2(Rng& rng);

/// (1 - eps)|psi_x><psi_x| + eps 1l/3.
DensityMatrix depolarize_fiducial(double x, const ImpurityModel& impurity);

/// Depolarizing weight giving the requested purity in [1/3, 1].
double impurity_for_purity(double target_purity);

// --- spherical tensor operators ---------------------------------------------

/// Index of T_{k,q} in the flattened list: 0 -> (0,0); 1..3 -> (1,-1..1); 4..8 -> (2,-2..2).
struct TensorIndex {
  int k;
  int q;
};
const std::array<TensorIndex, 9>& tensor_indices();

/// Orthonormal irreducible tensor operators T_{kq} (Tr T^dagger T = 1) for
/// spin 1, transforming under rotations like the spherical harmonics Y_{kq}.
const std::array<Mat3, 9>& tensor_operators();

// --- Wigner function on the sphere ------------------------------------------

/// Condon-Shortley spherical harmonic, k <= 2.
cplx spherical_harmonic(int k, int q, double theta, double phi);

/// W(theta, phi) = sqrt(3/(4 pi)) sum_{k<=2,q} Tr(rho T_kq^dagger) Y_kq(theta, phi),
/// normalized so the integral over the sphere is 1.
double wigner_value(const DensityMatrix& rho, double theta, double phi);

struct WignerGrid {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<double> theta;   // n_theta points, 0..pi inclusive
  std::vector<double> phi;     // n_phi points, 2 pi j / n_phi
  std::vector<double> values;  // row-major, values[i * n_phi + j]
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_phi + j]; }
};

/// Throws DomainError unless both grid sizes are >= 2.
WignerGrid wigner_sphere(const DensityMatrix& rho, int n_theta, int n_phi);

/// Clenshaw-Curtis in theta, periodic rule in phi. Exact for spin-1 once
/// n_theta >= 5 and n_phi >= 5.
double integrate_sphere(const WignerGrid& grid);

}  // namespace biphoton
