#include "biphoton/detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biphoton/channels.hpp"
#include "biphoton/errors.hpp"

namespace biphoton {

namespace {

void require_x(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("x must lie in [0,1], got " + std::to_string(x));
}

void require_gamma(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0, got " + std::to_string(gamma));
}

// 1 - P, accurate for small gamma.
double detection_probability(const CoefficientTriple& k, double gamma) {
  return -(k.A * std::expm1(-2.0 * gamma * gamma) + k.B * std::expm1(-0.5 * gamma * gamma));
}

}  // namespace

CoefficientTriple coefficients(double x) {
  require_x(x);
  const double q = x * x - x;
  return {0.8 * (-q + 1.0 / 12.0), 8.0 / 15.0 * (q + 0.75), 4.0 / 15.0 * (q + 2.0)};
}

double nondetection_probability(double x, double gamma) {
  require_gamma(gamma);
  return 1.0 - detection_probability(coefficients(x), gamma);
}

double nondetection_derivative(double x, double gamma) {
  require_gamma(gamma);
  const auto k = coefficients(x);
  return -4.0 * gamma * k.A * std::exp(-2.0 * gamma * gamma) - gamma * k.B * std::exp(-0.5 * gamma * gamma);
}

double nondetection_probability_channel(const DensityMatrix& rho_in, double x, double gamma) {
  const Vec3 psi = fiducial_state(x).amplitudes();
  const Mat3 out = apply_raw(jitter_exact(gamma), rho_in.matrix());
  return (psi.adjoint() * out * psi)(0).real();
}

DetectionOutcome simulate_detection_p(double p, std::uint64_t trials, Rng& rng) {
  if (trials < 1) throw DomainError("simulate_detection: N must be >= 1");
  std::binomial_distribution<std::uint64_t> dist(trials, std::clamp(p, 0.0, 1.0));
  return {trials, dist(rng)};
}

DetectionOutcome simulate_detection(double x, double gamma, std::uint64_t trials, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_detection_p(nondetection_probability(x, gamma), trials, rng);
}

PbsStatistics pbs_statistics(const DensityMatrix& rho) {
  PbsStatistics s;
  s.a = rho.a();
  s.b = rho.b();
  s.c = rho.c();
  s.d = rho.d().real();
  s.p_hv = rotate(rho, waveplate_su2(half_wave_plate(kPi / 8.0))).b();
  return s;
}

ProjectionEstimate projection_from_stats(const PbsStatistics& s, double x) {
  require_x(x);
  if (std::abs(s.a + s.b + s.c - 1.0) > 1e-6)
    throw ValidationError("projection_from_stats: a + b + c = " + std::to_string(s.a + s.b + s.c));
  const double d = 0.5 - s.p_hv - 0.5 * s.b;
  const double raw = s.a * x + s.c * (1.0 - x) + 2.0 * d * std::sqrt(x * (1.0 - x));
  if (raw < -1e-6 || raw > 1.0 + 1e-6)
    throw ValidationError("projection_from_stats: estimate " + std::to_string(raw) + " outside [0,1]");
  ProjectionEstimate e;
  e.value = std::clamp(raw, 0.0, 1.0);
  e.clamped = e.value != raw;
  return e;
}

double sensitivity(double x, double gamma, double trials) {
  require_gamma(gamma);
  if (!(trials >= 1.0)) throw DomainError("sensitivity: N must be >= 1");
  const auto k = coefficients(x);
  if (gamma == 0.0) {
    const double kx = 2.0 * k.A + 0.5 * k.B;
    return 1.0 / (2.0 * std::sqrt(kx * trials));
  }
  const double q = detection_probability(k, gamma);
  const double slope = std::abs(nondetection_derivative(x, gamma));
  if (!(slope > 0.0)) return kInfiniteSensitivity;
  return std::sqrt((1.0 - q) * q / trials) / slope;
}

double sensitivity_crossing(double x1, double x2, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("sensitivity_crossing: empty bracket");
  auto f = [&](double g) { return sensitivity(x1, g, 1.0) - sensitivity(x2, g, 1.0); };
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0 && fhi != 0.0) return lo;
  if (fhi == 0.0 && flo != 0.0) return hi;
  if (!(flo * fhi < 0.0)) throw NotFoundError("sensitivity_crossing: no sign change in bracket");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GammaEstimate estimate_gamma(double p_hat, double x) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw DomainError("estimate_gamma: p_hat must lie in [0,1]");
  const auto k = coefficients(x);
  if (p_hat >= 1.0) return {0.0, false};
  if (p_hat <= k.C) return {std::numeric_limits<double>::infinity(), true};
  const double target = 1.0 - p_hat;  // compare detection probabilities, monotone increasing
  double lo = 0.0, hi = 1.0;
  while (detection_probability(k, hi) < target) hi *= 2.0;
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (detection_probability(k, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

CoefficientTriple fit_detection_curve(const std::vector<double>& gammas, const std::vector<double>& p) {
  if (gammas.size() != p.size()) throw ValidationError("fit_detection_curve: size mismatch");
  const auto n = static_cast<Eigen::Index>(gammas.size());
  Eigen::MatrixXd g(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gm = gammas[static_cast<std::size_t>(i)];
    require_gamma(gm);
    g(i, 0) = std::exp(-2.0 * gm * gm);
    g(i, 1) = std::exp(-0.5 * gm * gm);
    g(i, 2) = 1.0;
    y(i) = p[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
  if (qr.rank() < 3) throw ValidationError("fit_detection_curve: need at least three distinct gamma values");
  Eigen::Vector3d theta = qr.solve(y);
  if (theta.sum() > 1.0) {
    // Active constraint: solve the KKT system for A + B + C = 1.
    Eigen::Matrix4d kkt = Eigen::Matrix4d::Zero();
    kkt.topLeftCorner<3, 3>() = 2.0 * g.transpose() * g;
    kkt.block<3, 1>(0, 3).setOnes();
    kkt.block<1, 3>(3, 0).setOnes();
    Eigen::Vector4d rhs;
    rhs.head<3>() = 2.0 * g.transpose() * y;
    rhs(3) = 1.0;
    theta = kkt.fullPivLu().solve(rhs).head<3>();
  }
  return {theta(0), theta(1), theta(2)};
}

std::vector<DetectionRow> detection_sweep(const std::vector<double>& xs, const std::vector<double>& gammas) {
  std::vector<DetectionRow> rows;
  rows.reserve(xs.size() * gammas.size());
  for (double x : xs)
    for (double g : gammas)
      rows.push_back({x, g, nondetection_probability(x, g), nondetection_derivative(x, g), sensitivity(x, g, 1.0)});
  return rows;
}

}  // namespace biphoton
