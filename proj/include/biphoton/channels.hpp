#pragma once

// Quantum processes on the spin-1 space.
//
// A Superoperator acts on column-stacked 3x3 operators: vec(E[rho]) = S vec(rho).
// The Choi matrix uses input (x) output ordering,
//   J = sum_ij |i><j| (x) E[|i><j|],   Tr J = 3,
// so a channel is trace preserving iff Tr_out J = 1l.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "biphoton/linalg.hpp"
#include "biphoton/spinspace.hpp"

namespace biphoton {

class Superoperator {
 public:
  Superoperator() : mat_(Mat9::Identity()) {}
  explicit Superoperator(const Mat9& m) : mat_(m) {}

  static Superoperator identity() { return Superoperator(); }
  /// rho -> U rho U^dagger.
  static Superoperator unitary(const Mat3& u);
  static Superoperator unitary(const Su2Element& u) { return unitary(u.spin1()); }
  /// Tabulates an arbitrary linear map on the matrix units.
  static Superoperator from_linear_map(const std::function<Mat3(const Mat3&)>& map);
  /// rho -> sum_k K_k rho K_k^dagger.
  static Superoperator from_kraus(const std::vector<Mat3>& kraus);

  const Mat9& matrix() const { return mat_; }

 private:
  Mat9 mat_;
};

class ChoiMatrix {
 public:
  explicit ChoiMatrix(const Mat9& m) : mat_(m) {}
  const Mat9& matrix() const { return mat_; }
  /// Normalization tag written alongside serialized matrices.
  static constexpr const char* normalization() { return "trace=3"; }

 private:
  Mat9 mat_;
};

struct JitterSpec {
  double gamma = 0.0;
  int K = 50;
  std::uint64_t seed = 0;
};

struct CptpReport {
  bool cp = false;
  bool tp = false;
  double min_choi_eig = 0.0;
  double tp_residual = 0.0;
  bool ok() const { return cp && tp; }
};

/// Monte Carlo channel estimate with per-entry standard errors of the mean.
struct MonteCarloChannel {
  Superoperator mean;
  RealMat9 se_real;
  RealMat9 se_imag;
  std::size_t samples = 0;
};

// --- application and algebra -----------------------------------------------------

/// E[rho] as a raw matrix (no positivity checks).
Mat3 apply_raw(const Superoperator& e, const Mat3& rho);
/// E[rho] renormalized to unit trace; throws DomainError if the output is not
/// a state within 1e-6 (trace) / 1e-8 (eigenvalues).
DensityMatrix apply(const Superoperator& e, const DensityMatrix& rho);

/// Composition: compose(e, f) applies f first, then e.
Superoperator compose(const Superoperator& e, const Superoperator& f);

ChoiMatrix to_choi(const Superoperator& e);
Superoperator from_choi(const ChoiMatrix& c);

/// Tr over the output factor of a Choi matrix (a 3x3 operator on the input).
Mat3 partial_trace_output(const Mat9& choi);

CptpReport is_cptp(const Superoperator& e, double tol = 1e-8);
CptpReport is_cptp(const ChoiMatrix& c, double tol = 1e-8);

/// rho -> Tr(rho) 1l/3.
Superoperator complete_depolarizer();
/// rho -> rho^T (positive but not completely positive).
Superoperator transpose_map();

/// Random CPTP map with the given Kraus rank, from a Haar-like random isometry.
Superoperator random_cptp(std::uint64_t seed, int kraus_rank = 3);

// --- SU(2) jitter ---------------------------------------------------------------------

/// Per-rank eigenvalues of the isotropic jitter channel with Gaussian angle
/// width gamma over the real line: lambda_k = <chi_k(theta)> / (2k + 1),
///   lambda_0 = 1,
///   lambda_1 = (1 + 2 e^{-gamma^2/2}) / 3,
///   lambda_2 = (1 + 2 e^{-gamma^2/2} + 2 e^{-2 gamma^2}) / 5.
std::array<double, 3> jitter_rank_factors(double gamma);

/// Exact isotropic jitter channel, diagonal in the spherical tensor basis.
Superoperator jitter_exact(double gamma);

/// Random jitter rotation: axis uniform on the sphere, angle ~ N(0, gamma^2).
Su2Element sample_jitter_rotation(double gamma, Rng& rng);

/// Monte Carlo estimate of the jitter channel. Samples are split into fixed
/// shards seeded by derive_seed(seed, shard); shard sums are combined in shard
/// order, so the result is bitwise independent of `threads`.
MonteCarloChannel jitter_mc_stats(double gamma, std::size_t n_samples, std::uint64_t seed, int threads = 1);
Superoperator jitter_mc(double gamma, std::size_t n_samples, std::uint64_t seed, int threads = 1);

/// The K rotations of the discrete approximation.
std::vector<Su2Element> jitter_rotations(const JitterSpec& spec);
/// (1/K) sum_k U_k rho U_k^dagger.
Superoperator jitter_discrete(const JitterSpec& spec);

/// Purity of jitter_exact(gamma)[rho_in] for each gamma, with rho_in the
/// fiducial psi_x, depolarized by `impurity` when given.
std::vector<double> purity_curve(double x, const std::vector<double>& gammas,
                                 std::optional<ImpurityModel> impurity = std::nullopt);

}  // namespace biphoton
