#include "biphoton/channels.hpp"

#include <cmath>

#include "biphoton/errors.hpp"

namespace biphoton {

Superoperator Superoperator::unitary(const Mat3& u) { return Superoperator(kron(u.conjugate(), u)); }

Superoperator Superoperator::from_linear_map(const std::function<Mat3(const Mat3&)>& map) {
  Mat9 s;
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      Mat3 unit = Mat3::Zero();
      unit(i, j) = 1.0;
      s.col(i + 3 * j) = vec(map(unit));
    }
  }
  return Superoperator(s);
}

Superoperator Superoperator::from_kraus(const std::vector<Mat3>& kraus) {
  Mat9 s = Mat9::Zero();
  for (const auto& k : kraus) s += kron(k.conjugate(), k);
  return Superoperator(s);
}

Mat3 apply_raw(const Superoperator& e, const Mat3& rho) { return unvec(e.matrix() * vec(rho)); }

DensityMatrix apply(const Superoperator& e, const DensityMatrix& rho) {
  return DensityMatrix::renormalized(apply_raw(e, rho.matrix()));
}

Superoperator compose(const Superoperator& e, const Superoperator& f) {
  return Superoperator(e.matrix() * f.matrix());
}

// J[(i*3+a), (j*3+b)] = <a|E(|i><j|)|b> = S[(a+3b), (i+3j)]
ChoiMatrix to_choi(const Superoperator& e) {
  const Mat9& s = e.matrix();
  Mat9 j;
  for (int i = 0; i < 3; ++i)
    for (int jj = 0; jj < 3; ++jj)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) j(i * 3 + a, jj * 3 + b) = s(a + 3 * b, i + 3 * jj);
  return ChoiMatrix(j);
}

Superoperator from_choi(const ChoiMatrix& c) {
  const Mat9& j = c.matrix();
  Mat9 s;
  for (int i = 0; i < 3; ++i)
    for (int jj = 0; jj < 3; ++jj)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s(a + 3 * b, i + 3 * jj) = j(i * 3 + a, jj * 3 + b);
  return Superoperator(s);
}

Mat3 partial_trace_output(const Mat9& choi) {
  Mat3 t = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a) t(i, j) += choi(i * 3 + a, j * 3 + a);
  return t;
}

CptpReport is_cptp(const ChoiMatrix& c, double tol) {
  CptpReport r;
  const Mat9& j = c.matrix();
  const double herm = (j - j.adjoint()).cwiseAbs().maxCoeff();
  r.min_choi_eig = hermitian_eigenvalues(j).minCoeff();
  r.tp_residual = (partial_trace_output(j) - Mat3::Identity()).cwiseAbs().maxCoeff();
  r.cp = herm <= tol && r.min_choi_eig >= -tol;
  r.tp = r.tp_residual <= tol;
  return r;
}

CptpReport is_cptp(const Superoperator& e, double tol) { return is_cptp(to_choi(e), tol); }

Superoperator complete_depolarizer() {
  return Superoperator::from_linear_map([](const Mat3& m) -> Mat3 { return m.trace() * Mat3::Identity() / 3.0; });
}

Superoperator transpose_map() {
  return Superoperator::from_linear_map([](const Mat3& m) -> Mat3 { return m.transpose(); });
}

Superoperator random_cptp(std::uint64_t seed, int kraus_rank) {
  if (kraus_rank < 1) throw DomainError("random_cptp: Kraus rank must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const int rows = 3 * kraus_rank;
  Eigen::MatrixXcd g(rows, 3);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < 3; ++c) g(r, c) = cplx(normal(rng), normal(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  const Eigen::MatrixXcd v = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, 3);
  std::vector<Mat3> kraus;
  for (int k = 0; k < kraus_rank; ++k) kraus.emplace_back(v.block(3 * k, 0, 3, 3));
  return Superoperator::from_kraus(kraus);
}

// --- jitter -----------------------------------------------------------------------

std::array<double, 3> jitter_rank_factors(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("jitter: gamma must be >= 0");
  const double c1 = std::exp(-gamma * gamma / 2.0);  // <cos theta>
  const double c2 = std::exp(-2.0 * gamma * gamma);  // <cos 2 theta>
  return {1.0, (1.0 + 2.0 * c1) / 3.0, (1.0 + 2.0 * c1 + 2.0 * c2) / 5.0};
}

Superoperator jitter_exact(double gamma) {
  const auto lambda = jitter_rank_factors(gamma);
  const auto& t = tensor_operators();
  const auto& idx = tensor_indices();
  Mat9 s = Mat9::Zero();
  for (int i = 0; i < 9; ++i) {
    const Vec9 v = vec(t[i]);
    s += lambda[idx[i].k] * (v * v.adjoint());
  }
  return Superoperator(s);
}

Su2Element sample_jitter_rotation(double gamma, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::Vector3d axis;
  do {
    axis = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
  } while (axis.norm() < 1e-12);
  const double theta = gamma * normal(rng);
  return Su2Element::from_axis_angle(axis, theta);
}

namespace {

constexpr std::size_t kShardSize = 4096;

struct ShardSums {
  Mat9 sum = Mat9::Zero();
  RealMat9 sumsq_re = RealMat9::Zero();
  RealMat9 sumsq_im = RealMat9::Zero();
};

}  // namespace

MonteCarloChannel jitter_mc_stats(double gamma, std::size_t n_samples, std::uint64_t seed, int threads) {
  if (!(gamma >= 0.0)) throw DomainError("jitter_mc: gamma must be >= 0");
  if (n_samples < 1) throw DomainError("jitter_mc: n_samples must be >= 1");
  const std::size_t n_shards = (n_samples + kShardSize - 1) / kShardSize;
  std::vector<ShardSums> shards(n_shards);
  parallel_for(n_shards, threads, [&](std::size_t s) {
    Rng rng = make_rng(seed, s);
    const std::size_t count = std::min(kShardSize, n_samples - s * kShardSize);
    ShardSums& acc = shards[s];
    for (std::size_t i = 0; i < count; ++i) {
      const Mat3& u = sample_jitter_rotation(gamma, rng).spin1();
      const Mat9 term = kron(u.conjugate(), u);
      acc.sum += term;
      acc.sumsq_re += term.real().cwiseAbs2();
      acc.sumsq_im += term.imag().cwiseAbs2();
    }
  });
  ShardSums total;
  for (const auto& s : shards) {
    total.sum += s.sum;
    total.sumsq_re += s.sumsq_re;
    total.sumsq_im += s.sumsq_im;
  }
  const double n = static_cast<double>(n_samples);
  MonteCarloChannel out;
  out.samples = n_samples;
  const Mat9 mean = total.sum / n;
  out.mean = Superoperator(mean);
  if (n_samples > 1) {
    const RealMat9 var_re = ((total.sumsq_re - n * mean.real().cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
    const RealMat9 var_im = ((total.sumsq_im - n * mean.imag().cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
    out.se_real = (var_re / n).cwiseSqrt();
    out.se_imag = (var_im / n).cwiseSqrt();
  } else {
    out.se_real.setConstant(std::numeric_limits<double>::infinity());
    out.se_imag.setConstant(std::numeric_limits<double>::infinity());
  }
  return out;
}

Superoperator jitter_mc(double gamma, std::size_t n_samples, std::uint64_t seed, int threads) {
  return jitter_mc_stats(gamma, n_samples, seed, threads).mean;
}

std::vector<Su2Element> jitter_rotations(const JitterSpec& spec) {
  if (!(spec.gamma >= 0.0)) throw DomainError("jitter_discrete: gamma must be >= 0");
  if (spec.K < 1) throw DomainError("jitter_discrete: K must be >= 1");
  Rng rng(spec.seed);
  std::vector<Su2Element> out;
  out.reserve(spec.K);
  for (int k = 0; k < spec.K; ++k) out.push_back(sample_jitter_rotation(spec.gamma, rng));
  return out;
}

Superoperator jitter_discrete(const JitterSpec& spec) {
  const auto rotations = jitter_rotations(spec);
  Mat9 s = Mat9::Zero();
  for (const auto& r : rotations) s += kron(r.spin1().conjugate(), r.spin1());
  return Superoperator(s / static_cast<double>(rotations.size()));
}

std::vector<double> purity_curve(double x, const std::vector<double>& gammas,
                                 std::optional<ImpurityModel> impurity) {
  const DensityMatrix rho_in = depolarize_fiducial(x, impurity.value_or(ImpurityModel{}));
  std::vector<double> out;
  out.reserve(gammas.size());
  for (double g : gammas) out.push_back(purity(apply(jitter_exact(g), rho_in)));
  return out;
}

}  // namespace biphoton
