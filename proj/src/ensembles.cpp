#include "biphoton/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "biphoton/errors.hpp"

namespace biphoton {

namespace {

std::vector<double> normalized_weights(std::vector<double> w, std::size_t n) {
  if (w.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  if (w.size() != n) throw ValidationError("ensemble: weight count does not match state count");
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw ValidationError("ensemble: weights must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("ensemble: weights must sum to 1");
  return w;
}

RealMat9 outer(const RealVec9& c) { return c * c.transpose(); }

Mat3 fiducial_projector(double x) { return DensityMatrix::from_pure(fiducial_state(x)).matrix(); }

RealVec9 rotated_coordinates(const Mat3& p, const Mat3& u) { return operator_coordinates(u * p * u.adjoint()); }

}  // namespace

// --- ensembles --------------------------------------------------------------------

CovariantEnsemble CovariantEnsemble::discrete(double x, std::vector<Su2Element> rotations, std::vector<double> weights) {
  fiducial_state(x);  // range check
  if (rotations.empty()) throw ValidationError("CovariantEnsemble: no rotations");
  CovariantEnsemble e;
  e.x_ = x;
  e.weights_ = normalized_weights(std::move(weights), rotations.size());
  e.rotations_ = std::move(rotations);
  return e;
}

CovariantEnsemble CovariantEnsemble::continuous_haar(double x) {
  fiducial_state(x);
  CovariantEnsemble e;
  e.x_ = x;
  e.continuous_ = true;
  return e;
}

std::vector<PureState> CovariantEnsemble::states() const {
  if (continuous_) throw ValidationError("CovariantEnsemble: continuous ensemble has no finite state list");
  const PureState psi = fiducial_state(x_);
  std::vector<PureState> out;
  out.reserve(rotations_.size());
  for (const auto& r : rotations_) out.push_back(rotate(psi, r));
  return out;
}

RealVec9 GramMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<RealMat9> es(mat_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// --- Gram matrices ------------------------------------------------------------------

GramMatrix gram_continuous(double x, const QuadratureOrder& order) {
  if (order.beta < 1 || order.alpha < 1 || order.gamma < 1) throw DomainError("gram_continuous: bad quadrature order");
  const Mat3 p = fiducial_projector(x);
  const GaussLegendre gl = gauss_legendre(order.beta);
  const double wa = 1.0 / order.alpha, wg = 1.0 / order.gamma;
  const RealMat9 total = pairwise_sum<RealMat9>(0, static_cast<std::size_t>(order.beta), [&](std::size_t ib) {
    const double beta = std::acos(gl.nodes[ib]);
    const double wb = 0.5 * gl.weights[ib];
    RealMat9 acc = RealMat9::Zero();
    for (int ig = 0; ig < order.gamma; ++ig) {
      const double gamma = 2.0 * kPi * ig / order.gamma;
      const Mat3 inner = Su2Element::from_euler(0.0, beta, gamma).spin1();
      const Mat3 pi = inner * p * inner.adjoint();
      for (int ia = 0; ia < order.alpha; ++ia) {
        const double alpha = 2.0 * kPi * ia / order.alpha;
        acc += outer(rotated_coordinates(pi, Su2Element::from_euler(alpha, 0.0, 0.0).spin1()));
      }
    }
    return RealMat9(acc * (wb * wa * wg));
  });
  return GramMatrix(0.5 * (total + total.transpose()));
}

GramMatrix gram_of_projectors(const std::vector<Mat3>& ops, std::vector<double> weights) {
  if (ops.empty()) throw ValidationError("gram: empty ensemble");
  const auto w = normalized_weights(std::move(weights), ops.size());
  RealMat9 m = RealMat9::Zero();
  for (std::size_t i = 0; i < ops.size(); ++i) m += w[i] * outer(operator_coordinates(ops[i]));
  return GramMatrix(m);
}

GramMatrix gram_of_states(const std::vector<PureState>& states, std::vector<double> weights) {
  std::vector<Mat3> ops;
  ops.reserve(states.size());
  for (const auto& s : states) ops.push_back(DensityMatrix::from_pure(s).matrix());
  return gram_of_projectors(ops, std::move(weights));
}

GramMatrix gram_discrete(const CovariantEnsemble& ens) {
  if (ens.is_continuous()) return gram_continuous(ens.x());
  return gram_of_states(ens.states(), ens.weights());
}

GramMatrix gram_haar_pure_states() {
  // (p0, p1, p2) uniform on the simplex via p0 = u, p1 = (1-u) v, p2 = (1-u)(1-v),
  // density 2 (1-u); phases uniform.
  constexpr int kNodes = 6;
  const GaussLegendre gl = gauss_legendre(kNodes);
  RealMat9 m = RealMat9::Zero();
  for (int iu = 0; iu < kNodes; ++iu) {
    const double u = 0.5 * (gl.nodes[iu] + 1.0), wu = 0.5 * gl.weights[iu];
    for (int iv = 0; iv < kNodes; ++iv) {
      const double v = 0.5 * (gl.nodes[iv] + 1.0), wv = 0.5 * gl.weights[iv];
      const double p0 = u, p1 = (1.0 - u) * v, p2 = (1.0 - u) * (1.0 - v);
      const double w = 2.0 * (1.0 - u) * wu * wv / (kNodes * kNodes);
      for (int a = 0; a < kNodes; ++a) {
        for (int b = 0; b < kNodes; ++b) {
          Vec3 psi(std::sqrt(p0), std::sqrt(p1) * std::exp(kI * (2.0 * kPi * a / kNodes)),
                   std::sqrt(p2) * std::exp(kI * (2.0 * kPi * b / kNodes)));
          m += w * outer(operator_coordinates(psi * psi.adjoint()));
        }
      }
    }
  }
  return GramMatrix(0.5 * (m + m.transpose()));
}

std::vector<PureState> mub_states_d3(int n_bases) {
  if (n_bases < 1 || n_bases > 4) throw DomainError("mub_states_d3: 1..4 bases");
  std::vector<PureState> out;
  for (int n = 0; n < 3; ++n) out.emplace_back(Vec3::Unit(n).cast<cplx>());
  const double s = 1.0 / std::sqrt(3.0);
  for (int k = 0; k < n_bases - 1; ++k) {
    for (int j = 0; j < 3; ++j) {
      Vec3 v;
      for (int n = 0; n < 3; ++n) v(n) = s * std::exp(kI * (2.0 * kPi * ((k * n * n + j * n) % 3) / 3.0));
      out.push_back(PureState::normalized(v));
    }
  }
  return out;
}

// --- probe rotations --------------------------------------------------------------

ProbeScheme parse_scheme(const std::string& name) {
  if (name == "fibonacci") return ProbeScheme::fibonacci;
  if (name == "haar") return ProbeScheme::haar;
  if (name == "design") return ProbeScheme::design;
  throw ValidationError("unknown probe scheme '" + name + "' (expected fibonacci, haar or design)");
}

std::string scheme_name(ProbeScheme s) {
  switch (s) {
    case ProbeScheme::fibonacci:
      return "fibonacci";
    case ProbeScheme::haar:
      return "haar";
    case ProbeScheme::design:
      return "design";
  }
  return "?";
}

namespace {

const double kGoldenAngle = kPi * (3.0 - std::sqrt(5.0));

std::vector<EulerAngles> fibonacci_angles(int n) {
  std::vector<EulerAngles> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double step = std::fmod(i * kGoldenAngle, 2.0 * kPi);
    out.push_back({step, std::acos(z), step});
  }
  return out;
}

// log det of the orbit Gram and the orbit mean, as functions of 3n Euler angles.
class DesignObjective {
 public:
  DesignObjective(int n, double x) : n_(n), p_(fiducial_projector(x)) {}

  std::vector<RealVec9> coords(const Eigen::VectorXd& t) const {
    std::vector<RealVec9> c(n_);
    for (int i = 0; i < n_; ++i) c[i] = coord(t, i);
    return c;
  }

  RealVec9 coord(const Eigen::VectorXd& t, int i) const {
    return rotated_coordinates(p_, Su2Element::from_euler(t(3 * i), t(3 * i + 1), t(3 * i + 2)).spin1());
  }

  RealMat9 gram(const std::vector<RealVec9>& c) const {
    RealMat9 m = RealMat9::Zero();
    for (const auto& v : c) m += outer(v);
    return m / n_;
  }

  double logdet(const Eigen::VectorXd& t) const {
    Eigen::LLT<RealMat9> llt(gram(coords(t)));
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }

  Eigen::Matrix<double, 8, 1> constraint(const Eigen::VectorXd& t) const {
    RealVec9 s = RealVec9::Zero();
    for (int i = 0; i < n_; ++i) s += coord(t, i);
    return s.tail<8>() / n_;
  }

  // Gradient of logdet and Jacobian of the constraint by central differences
  // of the individual coordinate vectors.
  void derivatives(const Eigen::VectorXd& t, Eigen::VectorXd& grad, Eigen::MatrixXd& jac) const {
    const auto c = coords(t);
    const RealMat9 minv = gram(c).inverse();
    grad.resize(3 * n_);
    jac.resize(8, 3 * n_);
    constexpr double h = 1e-6;
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd tp = t, tm = t;
        tp(3 * i + k) += h;
        tm(3 * i + k) -= h;
        const RealVec9 dc = (coord(tp, i) - coord(tm, i)) / (2.0 * h);
        grad(3 * i + k) = 2.0 / n_ * c[i].dot(minv * dc);
        jac.col(3 * i + k) = dc.tail<8>() / n_;
      }
    }
  }

  int size() const { return 3 * n_; }

 private:
  int n_;
  Mat3 p_;
};

Eigen::VectorXd restore_feasibility(const DesignObjective& obj, Eigen::VectorXd t, bool& ok) {
  Eigen::VectorXd grad;
  Eigen::MatrixXd jac;
  ok = false;
  for (int it = 0; it < 60; ++it) {
    const auto h = obj.constraint(t);
    if (h.norm() < 1e-15) {
      ok = true;
      break;
    }
    obj.derivatives(t, grad, jac);
    const Eigen::MatrixXd jjt = jac * jac.transpose();
    t -= jac.transpose() * jjt.ldlt().solve(h);
  }
  if (!ok) ok = obj.constraint(t).norm() < 1e-13;
  return t;
}

std::vector<Su2Element> design_rotations(int n) {
  DesignObjective obj(n, two_design_fiducial_x());
  Eigen::VectorXd t(obj.size());
  const auto start = fibonacci_angles(n);
  for (int i = 0; i < n; ++i) t.segment<3>(3 * i) << start[i].alpha, start[i].beta, start[i].gamma;
  bool ok = false;
  t = restore_feasibility(obj, t, ok);
  if (!ok) throw ConsistencyError("probe_rotations: could not reach a balanced starting set");
  double f = obj.logdet(t);
  double step = 0.05;
  Eigen::VectorXd grad;
  Eigen::MatrixXd jac;
  for (int it = 0; it < 4000 && step > 1e-10; ++it) {
    obj.derivatives(t, grad, jac);
    const Eigen::MatrixXd jjt = jac * jac.transpose();
    const Eigen::VectorXd d = grad - jac.transpose() * jjt.ldlt().solve(jac * grad);
    if (d.norm() < 1e-10) break;
    const Eigen::VectorXd trial = restore_feasibility(obj, t + step * d / d.norm(), ok);
    const double ft = ok ? obj.logdet(trial) : -std::numeric_limits<double>::infinity();
    if (ft > f) {
      t = trial;
      f = ft;
      step = std::min(step * 1.5, 0.5);
    } else {
      step *= 0.5;
    }
  }
  std::vector<Su2Element> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(Su2Element::from_euler(t(3 * i), t(3 * i + 1), t(3 * i + 2)));
  return out;
}

}  // namespace

std::vector<Su2Element> probe_rotations(int n, ProbeScheme scheme, std::uint64_t seed) {
  if (n < 1) throw DomainError("probe_rotations: n must be >= 1");
  switch (scheme) {
    case ProbeScheme::fibonacci: {
      std::vector<Su2Element> out;
      for (const auto& e : fibonacci_angles(n)) out.push_back(Su2Element::from_euler(e));
      return out;
    }
    case ProbeScheme::haar: {
      Rng rng(seed);
      std::vector<Su2Element> out;
      for (int i = 0; i < n; ++i) out.push_back(haar_random_su2(rng));
      return out;
    }
    case ProbeScheme::design: {
      if (n < 9) throw DomainError("probe_rotations: the design scheme needs n >= 9");
      static std::mutex mutex;
      static std::map<int, std::vector<Su2Element>> cache;
      std::lock_guard<std::mutex> lock(mutex);
      auto it = cache.find(n);
      if (it == cache.end()) it = cache.emplace(n, design_rotations(n)).first;
      return it->second;
    }
  }
  throw ValidationError("probe_rotations: unknown scheme");
}

// --- diagnostics ----------------------------------------------------------------

std::vector<DetPoint> det_curve(const std::vector<double>& x_grid, int threads) {
  std::vector<DetPoint> out(x_grid.size());
  parallel_for(x_grid.size(), threads, [&](std::size_t i) {
    const RealVec9 ev = gram_continuous(x_grid[i]).eigenvalues();
    out[i].x = x_grid[i];
    out[i].det = ev.prod();
    out[i].min_eig = ev.minCoeff();
  });
  double best = 0.0;
  for (const auto& p : out) best = std::max(best, p.det);
  for (auto& p : out) p.det_norm = best > 0.0 ? p.det / best : 0.0;
  return out;
}

DesignReport is_2design(const GramMatrix& m, double tol) {
  RealVec9 ref = RealVec9::Constant(1.0 / 12.0);
  ref(8) = 1.0 / 3.0;  // ascending order
  DesignReport r;
  r.max_deviation = (m.eigenvalues() - ref).cwiseAbs().maxCoeff();
  r.is_design = r.max_deviation <= tol;
  return r;
}

UniformityReport uniformity_report(const GramMatrix& m) {
  const RealVec9 ev = m.eigenvalues();
  UniformityReport r;
  r.min_eig = ev.minCoeff();
  r.det = ev.prod();
  r.identity_component = m.matrix()(0, 0);
  r.rank = static_cast<int>((ev.array() > 1e-10).count());
  return r;
}

RealMat9 hs_conjugation(const Mat3& v) {
  const auto& basis = operator_basis();
  RealMat9 r;
  for (int b = 0; b < 9; ++b) r.col(b) = operator_coordinates(v * basis[b] * v.adjoint());
  return r;
}

}  // namespace biphoton
