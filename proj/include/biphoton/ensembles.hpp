#pragma once

// SU(2)-covariant probe ensembles and their Hilbert-Schmidt Gram matrices.
//
// Gram matrices are expressed in operator_basis() (1l/sqrt3 first, then the
// Gell-Mann matrices / sqrt2). Projectors have real coordinates there, so the
// Gram matrix is real symmetric.

#include <cstdint>
#include <string>
#include <vector>

#include "biphoton/linalg.hpp"
#include "biphoton/spinspace.hpp"

namespace biphoton {

class CovariantEnsemble {
 public:
  /// Rotations of psi_x with the given weights (uniform if empty).
  static CovariantEnsemble discrete(double x, std::vector<Su2Element> rotations, std::vector<double> weights = {});
  /// The full Haar orbit of psi_x.
  static CovariantEnsemble continuous_haar(double x);

  double x() const { return x_; }
  bool is_continuous() const { return continuous_; }
  const std::vector<Su2Element>& rotations() const { return rotations_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Realized probe states (discrete case only).
  std::vector<PureState> states() const;

 private:
  CovariantEnsemble() = default;
  double x_ = 0.0;
  bool continuous_ = false;
  std::vector<Su2Element> rotations_;
  std::vector<double> weights_;
};

class GramMatrix {
 public:
  explicit GramMatrix(const RealMat9& m) : mat_(m) {}
  const RealMat9& matrix() const { return mat_; }
  /// Ascending.
  RealVec9 eigenvalues() const;
  double trace() const { return mat_.trace(); }

 private:
  RealMat9 mat_;
};

struct QuadratureOrder {
  int beta = 8;    // Gauss-Legendre nodes in cos(beta)
  int alpha = 16;  // trapezoid nodes
  int gamma = 16;
};

/// Gram matrix of the Haar orbit of psi_x, by tensor-product quadrature over
/// Euler angles with the normalized measure sin(beta) / (8 pi^2).
GramMatrix gram_continuous(double x, const QuadratureOrder& order = {});
GramMatrix gram_discrete(const CovariantEnsemble& ens);
/// Gram matrix of an arbitrary weighted list of pure states.
GramMatrix gram_of_states(const std::vector<PureState>& states, std::vector<double> weights = {});
GramMatrix gram_of_projectors(const std::vector<Mat3>& ops, std::vector<double> weights = {});

/// Gram matrix of all pure states under the unitarily invariant measure,
/// by a quadrature that integrates degree-2 moments exactly.
GramMatrix gram_haar_pure_states();

/// Complete set of 4 mutually unbiased bases in d = 3 (12 states); pass 3 for
/// the computational basis plus two Fourier-type bases.
std::vector<PureState> mub_states_d3(int n_bases = 4);

enum class ProbeScheme { fibonacci, haar, design };
/// "fibonacci" | "haar" | "design"; throws ValidationError otherwise.
ProbeScheme parse_scheme(const std::string& name);
std::string scheme_name(ProbeScheme s);

/// n probe rotations.
///  fibonacci: (alpha, beta) on a spherical Fibonacci lattice, third Euler
///             angle stepped by the golden angle.
///  haar:      seeded Haar-random rotations.
///  design:    the fibonacci set refined to maximize log det of the Gram
///             matrix of the psi_{x*} orbit, x* = 1/2 - 1/(2 sqrt2), with the
///             orbit averaging to 1l/3 exactly. Deterministic and cached.
std::vector<Su2Element> probe_rotations(int n = 10, ProbeScheme scheme = ProbeScheme::design, std::uint64_t seed = 0);

struct DetPoint {
  double x = 0.0;
  double det_norm = 0.0;
  double min_eig = 0.0;
  double det = 0.0;
};
/// det(gram_continuous(x)) normalized to its maximum over the grid.
std::vector<DetPoint> det_curve(const std::vector<double>& x_grid, int threads = 1);

struct DesignReport {
  bool is_design = false;
  double max_deviation = 0.0;  // largest |eig - reference eig|, both sorted
};
/// Compares the spectrum with {1/3, 1/12 x8}.
DesignReport is_2design(const GramMatrix& m, double tol = 1e-9);

struct UniformityReport {
  double min_eig = 0.0;
  double det = 0.0;
  double identity_component = 0.0;
  int rank = 0;  // eigenvalues above 1e-10
};
UniformityReport uniformity_report(const GramMatrix& m);

/// Real orthogonal R with R_ab = Tr(B_a V B_b V^dagger): the action of
/// rho -> V rho V^dagger on operator coordinates.
RealMat9 hs_conjugation(const Mat3& v);

}  // namespace biphoton
