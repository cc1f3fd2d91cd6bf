#pragma once

// Decoherence detection: project the decohered probe back onto the fiducial
// and count how often it survives.

#include <cstdint>
#include <limits>
#include <vector>

#include "biphoton/spinspace.hpp"

namespace biphoton {

/// P(gamma) = A e^{-2 gamma^2} + B e^{-gamma^2/2} + C for the fiducial psi_x.
struct CoefficientTriple {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double sum() const { return A + B + C; }
};

struct DetectionOutcome {
  std::uint64_t trials = 0;
  std::uint64_t nondetections = 0;
  double p_hat() const { return trials ? static_cast<double>(nondetections) / static_cast<double>(trials) : 0.0; }
};

/// Populations and coherence visible to a polarizing beam splitter.
struct PbsStatistics {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;     // Re rho_02
  double p_hv = 0.0;  // one photon in each port after HWP at 22.5 deg
};

struct ProjectionEstimate {
  double value = 0.0;
  bool clamped = false;  // raw value was outside [0,1] by at most 1e-6
};

struct GammaEstimate {
  double gamma = 0.0;
  bool saturated = false;  // p_hat at or below the asymptote C_x; gamma is +inf
};

inline constexpr double kInfiniteSensitivity = std::numeric_limits<double>::infinity();

CoefficientTriple coefficients(double x);

double nondetection_probability(double x, double gamma);
/// dP/dgamma = -4 gamma A e^{-2 gamma^2} - gamma B e^{-gamma^2/2}.
double nondetection_derivative(double x, double gamma);

/// Tr(|psi_x><psi_x| D_gamma[rho_in]) through the exact jitter channel.
double nondetection_probability_channel(const DensityMatrix& rho_in, double x, double gamma);

/// n ~ Binomial(N, P(x, gamma)).
DetectionOutcome simulate_detection(double x, double gamma, std::uint64_t trials, std::uint64_t seed);
DetectionOutcome simulate_detection_p(double p, std::uint64_t trials, Rng& rng);

PbsStatistics pbs_statistics(const DensityMatrix& rho);

/// a x + c (1-x) + 2 d sqrt(x(1-x)), with d recovered from P_HV.
/// Throws ValidationError if a+b+c is off by more than 1e-6 or the raw value
/// leaves [0,1] by more than 1e-6.
ProjectionEstimate projection_from_stats(const PbsStatistics& s, double x);

/// Delta gamma = sqrt(P(1-P)/N) / |dP/dgamma|. At gamma = 0 returns the limit
/// 1/(2 sqrt(k N)), k = 2A + B/2.
double sensitivity(double x, double gamma, double trials);

/// Root of sensitivity(x1, .) - sensitivity(x2, .) in [lo, hi] by bisection.
/// Throws NotFoundError when there is no sign change.
double sensitivity_crossing(double x1, double x2, double lo = 0.7, double hi = 1.3);

/// Inverts P(x, .) by bisection.
GammaEstimate estimate_gamma(double p_hat, double x);

/// Least-squares (A, B, C) for measured (gamma, P) pairs, constrained to
/// A + B + C <= 1.
CoefficientTriple fit_detection_curve(const std::vector<double>& gammas, const std::vector<double>& p);

struct DetectionRow {
  double x = 0.0;
  double gamma = 0.0;
  double p = 0.0;
  double dp_dgamma = 0.0;
  double sensitivity_scaled = 0.0;  // Delta gamma * sqrt(N)
};

std::vector<DetectionRow> detection_sweep(const std::vector<double>& xs, const std::vector<double>& gammas);

}  // namespace biphoton
