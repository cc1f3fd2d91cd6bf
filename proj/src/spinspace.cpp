#include "biphoton/spinspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "biphoton/errors.hpp"

namespace biphoton {

namespace {

void require_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(v));
}

Mat2 rz_spinor(double a) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = std::exp(-kI * (a / 2.0));
  m(1, 1) = std::exp(kI * (a / 2.0));
  return m;
}

Mat2 ry_spinor(double b) {
  const double c = std::cos(b / 2.0), s = std::sin(b / 2.0);
  Mat2 m;
  m << c, -s, s, c;
  return m;
}

Mat3 rz_spin1(double a) {
  Mat3 m = Mat3::Zero();
  m(0, 0) = std::exp(-kI * a);
  m(1, 1) = 1.0;
  m(2, 2) = std::exp(kI * a);
  return m;
}

// Wigner small-d matrix for j = 1.
Mat3 ry_spin1(double b) {
  const double c = std::cos(b), s = std::sin(b), r = 1.0 / std::sqrt(2.0);
  Mat3 m;
  m << (1.0 + c) / 2.0, -s * r, (1.0 - c) / 2.0,
       s * r, c, -s * r,
       (1.0 - c) / 2.0, s * r, (1.0 + c) / 2.0;
  return m;
}

}  // namespace

// --- PureState / DensityMatrix ------------------------------------------------

PureState::PureState(const Vec3& amplitudes) : amps_(amplitudes) {
  const double n = amps_.squaredNorm();
  if (!(std::abs(n - 1.0) <= 1e-12))
    throw DomainError("PureState: amplitudes not normalized (|psi|^2 = " + std::to_string(n) + ")");
}

PureState PureState::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw DomainError("PureState: zero vector");
  return PureState(v / n);
}

DensityMatrix::DensityMatrix(const Mat3& m) : m_(m) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError("DensityMatrix: not Hermitian");
  const cplx tr = m.trace();
  if (std::abs(tr - 1.0) > 1e-12) throw DomainError("DensityMatrix: trace is not 1");
  m_ = hermitian_part(m);
  if (hermitian_eigenvalues(m_).minCoeff() < -1e-10)
    throw DomainError("DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix(Mat3::Identity() / 3.0, Unchecked{});
}

DensityMatrix DensityMatrix::renormalized(const Mat3& m, double trace_tol, double psd_tol) {
  Mat3 h = hermitian_part(m);
  const double tr = h.trace().real();
  if (!(std::abs(tr - 1.0) <= trace_tol))
    throw DomainError("DensityMatrix: trace " + std::to_string(tr) + " too far from 1");
  h /= tr;
  if (hermitian_eigenvalues(h).minCoeff() < -psd_tol)
    throw DomainError("DensityMatrix: operator is not positive semidefinite");
  return DensityMatrix(h, Unchecked{});
}

// --- spin operators and SU(2) --------------------------------------------------

const SpinOperators& spin_operators() {
  static const SpinOperators ops = [] {
    const double r = 1.0 / std::sqrt(2.0);
    SpinOperators o;
    o.jx << 0, r, 0, r, 0, r, 0, r, 0;
    o.jy << 0, -kI * r, 0, kI * r, 0, -kI * r, 0, kI * r, 0;
    o.jz = Mat3::Zero();
    o.jz.diagonal() << 1.0, 0.0, -1.0;
    return o;
  }();
  return ops;
}

Mat3 lift_to_spin1(const Mat2& w) {
  const double r2 = std::sqrt(2.0);
  Mat3 l;
  l << w(0, 0) * w(0, 0), r2 * w(0, 0) * w(0, 1), w(0, 1) * w(0, 1),
       r2 * w(0, 0) * w(1, 0), w(0, 0) * w(1, 1) + w(0, 1) * w(1, 0), r2 * w(0, 1) * w(1, 1),
       w(1, 0) * w(1, 0), r2 * w(1, 0) * w(1, 1), w(1, 1) * w(1, 1);
  return l;
}

Su2Element::Su2Element() : spinor_(Mat2::Identity()), u_(Mat3::Identity()), euler_(EulerAngles{}) {}

Su2Element::Su2Element(const Mat2& s, std::optional<EulerAngles> e)
    : spinor_(s), u_(lift_to_spin1(s)), euler_(e) {}

Su2Element Su2Element::from_euler(double alpha, double beta, double gamma) {
  Su2Element el;
  el.spinor_ = rz_spinor(alpha) * ry_spinor(beta) * rz_spinor(gamma);
  el.u_ = rz_spin1(alpha) * ry_spin1(beta) * rz_spin1(gamma);
  el.euler_ = EulerAngles{alpha, beta, gamma};
  return el;
}

Su2Element Su2Element::from_axis_angle(const Eigen::Vector3d& axis, double theta) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw DomainError("Su2Element: zero rotation axis");
  const Eigen::Vector3d r = axis / n;
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  // cos(t/2) 1l - i sin(t/2) r.sigma
  Mat2 m;
  m << cplx(c, -s * r.z()), cplx(-s * r.y(), -s * r.x()),
       cplx(s * r.y(), -s * r.x()), cplx(c, s * r.z());
  return Su2Element(m, std::nullopt);
}

Su2Element Su2Element::from_spinor(const Mat2& s) {
  if ((s * s.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("Su2Element: spinor matrix is not unitary");
  if (std::abs(s.determinant() - 1.0) > 1e-10)
    throw DomainError("Su2Element: spinor determinant is not 1");
  return Su2Element(s, std::nullopt);
}

EulerAngles Su2Element::euler() const {
  if (euler_) return *euler_;
  const cplx s00 = spinor_(0, 0), s10 = spinor_(1, 0);
  EulerAngles e;
  e.beta = 2.0 * std::atan2(std::abs(s10), std::abs(s00));
  const double sum = std::abs(s00) > 1e-14 ? -2.0 * std::arg(s00) : 0.0;   // alpha + gamma
  const double diff = std::abs(s10) > 1e-14 ? 2.0 * std::arg(s10) : 0.0;   // alpha - gamma
  if (std::abs(s00) <= 1e-14) {
    e.alpha = diff;
    e.gamma = 0.0;
  } else if (std::abs(s10) <= 1e-14) {
    e.alpha = sum;
    e.gamma = 0.0;
  } else {
    e.alpha = 0.5 * (sum + diff);
    e.gamma = 0.5 * (sum - diff);
  }
  return e;
}

Su2Element Su2Element::inverse() const { return Su2Element(spinor_.adjoint(), std::nullopt); }

Su2Element operator*(const Su2Element& a, const Su2Element& b) {
  return Su2Element(a.spinor_ * b.spinor_, std::nullopt);
}

Eigen::Vector3d Su2Element::direction() const {
  const auto& ops = spin_operators();
  const Vec3 up = u_.col(0);
  return {(up.adjoint() * ops.jx * up)(0).real(), (up.adjoint() * ops.jy * up)(0).real(),
          (up.adjoint() * ops.jz * up)(0).real()};
}

Su2Element su2_from_euler(double alpha, double beta, double gamma) {
  return Su2Element::from_euler(alpha, beta, gamma);
}

Su2Element haar_random_su2(Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::Vector4d q;
  for (int i = 0; i < 4; ++i) q(i) = normal(rng);
  q.normalize();
  Mat2 m;
  m << cplx(q(0), -q(3)), cplx(-q(2), -q(1)), cplx(q(2), -q(1)), cplx(q(0), q(3));
  return Su2Element::from_spinor(m);
}

// --- waveplates ------------------------------------------------------------------

Mat2 jones_matrix(const WaveplateSpec& spec) {
  if (!(spec.retardance >= 0.0 && spec.retardance < 2.0 * kPi))
    throw DomainError("WaveplateSpec: retardance must lie in [0, 2 pi)");
  const double c = std::cos(spec.fast_axis), s = std::sin(spec.fast_axis);
  Mat2 rot;
  rot << c, -s, s, c;
  Mat2 phases = Mat2::Zero();
  phases(0, 0) = std::exp(-kI * (spec.retardance / 2.0));
  phases(1, 1) = std::exp(kI * (spec.retardance / 2.0));
  return rot * phases * rot.transpose();
}

Su2Element waveplate_su2(const WaveplateSpec& spec) {
  return Su2Element::from_spinor(jones_matrix(spec));
}

// --- states -------------------------------------------------------------------------

PureState fiducial_state(double x) {
  require_unit_interval(x, "fiducial parameter x");
  Vec3 v(std::sqrt(x), 0.0, std::sqrt(1.0 - x));
  return PureState::normalized(v);
}

DensityMatrix rotate(const DensityMatrix& rho, const Su2Element& u) {
  const Mat3& m = u.spin1();
  return DensityMatrix::renormalized(m * rho.matrix() * m.adjoint(), 1e-10, 1e-10);
}

PureState rotate(const PureState& psi, const Su2Element& u) {
  return PureState::normalized(u.spin1() * psi.amplitudes());
}

double purity(const DensityMatrix& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

double fidelity(const Mat3& rho, const Mat3& sigma, double psd_tol) {
  const Mat3 r = hermitian_part(rho), s = hermitian_part(sigma);
  Eigen::SelfAdjointEigenSolver<Mat3> er(r), es(s);
  if (er.eigenvalues().minCoeff() < -psd_tol || es.eigenvalues().minCoeff() < -psd_tol)
    throw DomainError("fidelity: input is not positive semidefinite");
  auto support = [](const Eigen::Vector3d& ev) {
    std::vector<int> keep;
    const double cut = 1e-13 * std::max(ev.maxCoeff(), 0.0);
    for (int i = 0; i < 3; ++i)
      if (ev(i) > cut) keep.push_back(i);
    return keep;
  };
  // sqrt(r) s sqrt(r) restricted to the support of the lower-rank argument;
  // pure inputs then reduce to <psi|s|psi> without square-root round-off
  auto kr = support(er.eigenvalues()), ks = support(es.eigenvalues());
  const bool swap = ks.size() < kr.size();
  const auto& e = swap ? es : er;
  const auto& keep = swap ? ks : kr;
  const Mat3& other = swap ? r : s;
  const auto n = static_cast<Eigen::Index>(keep.size());
  if (n == 0) return 0.0;
  Eigen::MatrixXcd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const int a = keep[static_cast<std::size_t>(i)], b = keep[static_cast<std::size_t>(j)];
      k(i, j) = std::sqrt(e.eigenvalues()(a) * e.eigenvalues()(b)) *
                (e.eigenvectors().col(a).adjoint() * other * e.eigenvectors().col(b))(0, 0);
    }
  double root = 0.0;
  if (n == 1) {
    root = std::sqrt(std::max(k(0, 0).real(), 0.0));
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ek(k, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < n; ++i) root += std::sqrt(std::max(ek.eigenvalues()(i), 0.0));
  }
  return std::clamp(root * root, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return fidelity(rho.matrix(), sigma.matrix());
}

PureState haar_random_state(Rng& rng) {
  std::normal_distribution<double> normal;
  Vec3 v;
  for (int i = 0; i < 3; ++i) v(i) = cplx(normal(rng), normal(rng));
  return PureState::normalized(v);
}

PureState haar_random_state(std::uint64_t seed) {
  Rng rng(seed);
  return haar_random_state(rng);
}

DensityMatrix depolarize_fiducial(double x, const ImpurityModel& impurity) {
  require_unit_interval(impurity.epsilon, "impurity epsilon");
  const double eps = impurity.epsilon;
  const Mat3 pure = DensityMatrix::from_pure(fiducial_state(x)).matrix();
  return DensityMatrix((1.0 - eps) * pure + eps * Mat3::Identity() / 3.0);
}

double impurity_for_purity(double target_purity) {
  if (!(target_purity >= 1.0 / 3.0 - 1e-15 && target_purity <= 1.0))
    throw DomainError("impurity_for_purity: purity must lie in [1/3, 1]");
  // purity(eps) = 1 - 4 eps / 3 + 2 eps^2 / 3
  return 1.0 - std::sqrt(std::max(0.0, (3.0 * target_purity - 1.0) / 2.0));
}

}  // namespace biphoton
