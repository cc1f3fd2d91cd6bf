#include "biphoton/qpt.hpp"

#include <algorithm>
#include <cmath>

#include "biphoton/errors.hpp"

namespace biphoton {

namespace {

constexpr double kProbFloor = 1e-12;

std::vector<std::uint64_t> sample_multinomial(const std::vector<double>& probs, std::uint64_t n, Rng& rng) {
  std::vector<std::uint64_t> out(probs.size(), 0);
  double remaining_p = 1.0;
  std::uint64_t remaining_n = n;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining_n > 0; ++k) {
    const double q = remaining_p > 0.0 ? std::clamp(probs[k] / remaining_p, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> dist(remaining_n, q);
    out[k] = dist(rng);
    remaining_n -= out[k];
    remaining_p -= probs[k];
  }
  if (!probs.empty()) out.back() += remaining_n;
  return out;
}

std::vector<double> checked_probabilities(const std::vector<Mat3>& effects, const Mat3& rho) {
  std::vector<double> p(effects.size());
  double total = 0.0;
  for (std::size_t k = 0; k < effects.size(); ++k) {
    const double v = (effects[k] * rho).trace().real();
    if (v < -1e-9 || v > 1.0 + 1e-9)
      throw ConsistencyError("Born probability " + std::to_string(v) + " outside [0,1]");
    p[k] = std::clamp(v, 0.0, 1.0);
    total += p[k];
  }
  if (total > 0.0)
    for (auto& v : p) v /= total;
  return p;
}

// X_pk = rho_p^T (x) E_k, so that p_pk = Tr(J X_pk).
std::vector<Mat9> design_operators(const std::vector<DensityMatrix>& probes, const std::vector<Mat3>& effects) {
  std::vector<Mat9> x;
  x.reserve(probes.size() * effects.size());
  for (const auto& rho : probes)
    for (const auto& e : effects) x.push_back(kron(rho.matrix().transpose(), e));
  return x;
}

double trace_product(const Mat9& a, const Mat9& b) { return (a.cwiseProduct(b.transpose())).sum().real(); }

RealVec9 coordinates_of(const std::vector<Mat3>& ops, std::size_t i) { return operator_coordinates(ops[i]); }

void require_complete_probes(const std::vector<DensityMatrix>& probes) {
  const int rank = probe_rank(probes);
  if (rank < 9) throw IncompleteProbeSetError(9 - rank);
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

// --- measurements ------------------------------------------------------------------

MeasurementSet::MeasurementSet(std::vector<Mat3> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) throw ValidationError("MeasurementSet: no effects");
  Mat3 sum = Mat3::Zero();
  for (const auto& e : effects_) {
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw ValidationError("MeasurementSet: effect not Hermitian");
    if (hermitian_eigenvalues(e).minCoeff() < -1e-10) throw ValidationError("MeasurementSet: effect not PSD");
    sum += e;
  }
  if (max_abs_diff(sum, Mat3::Identity()) > 1e-10) throw ValidationError("MeasurementSet: effects do not sum to 1l");
}

int MeasurementSet::span_dimension() const {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(effects_.size()), 9);
  for (std::size_t k = 0; k < effects_.size(); ++k) a.row(static_cast<Eigen::Index>(k)) = coordinates_of(effects_, k);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

const MeasurementSet& default_measurement_set() {
  static const MeasurementSet ms = [] {
    const auto rotations = probe_rotations(10, ProbeScheme::design);
    const PureState psi = fiducial_state(two_design_fiducial_x());
    std::vector<Mat3> effects;
    Mat3 sum = Mat3::Zero();
    for (const auto& r : rotations) {
      const Vec3 v = rotate(psi, r).amplitudes();
      effects.push_back(0.3 * v * v.adjoint());
      sum += effects.back();
    }
    if (max_abs_diff(sum, Mat3::Identity()) > 1e-13) {
      const Mat3 s = inv_sqrt_pd(sum);
      for (auto& e : effects) e = hermitian_part(Mat3(s * e * s));
    }
    return MeasurementSet(effects);
  }();
  return ms;
}

// --- probes and data -------------------------------------------------------------------

ProbeSet make_probe_set(double x, const std::vector<Su2Element>& rotations, const ImpurityModel& impurity) {
  ProbeSet p;
  p.x = x;
  p.epsilon = impurity.epsilon;
  const DensityMatrix base = depolarize_fiducial(x, impurity);
  for (const auto& r : rotations) {
    p.rotations.push_back(r.euler());
    p.states.push_back(rotate(base, r));
  }
  return p;
}

int probe_rank(const std::vector<DensityMatrix>& probes) {
  if (probes.empty()) return 0;
  std::vector<Mat3> ops;
  for (const auto& p : probes) ops.push_back(p.matrix());
  return uniformity_report(gram_of_projectors(ops)).rank;
}

std::vector<std::vector<double>> born_probabilities(const Superoperator& e, const std::vector<DensityMatrix>& probes,
                                                    const std::vector<Mat3>& effects) {
  std::vector<std::vector<double>> out;
  out.reserve(probes.size());
  for (const auto& rho : probes) out.push_back(checked_probabilities(effects, apply_raw(e, rho.matrix())));
  return out;
}

ExperimentData simulate_process_data(const Superoperator& e, const ProbeSet& probes, const MeasurementSet& ms,
                                     std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw ValidationError("simulate_process_data: shots must be >= 1");
  ExperimentData d;
  d.probes = probes;
  d.effects = ms.effects();
  d.shots = shots;
  d.seed = seed;
  const auto probs = born_probabilities(e, probes.states, ms.effects());
  for (std::size_t p = 0; p < probs.size(); ++p) {
    Rng rng = make_rng(seed, p);
    d.counts.push_back(sample_multinomial(probs[p], shots, rng));
  }
  return d;
}

// --- linear inversion ---------------------------------------------------------------

ProcessEstimate linear_inversion_qpt(const std::vector<std::vector<double>>& frequencies,
                                     const std::vector<DensityMatrix>& probes_exact, const std::vector<Mat3>& effects) {
  if (frequencies.size() != probes_exact.size()) throw ValidationError("linear_inversion_qpt: probe count mismatch");
  require_complete_probes(probes_exact);
  if (MeasurementSet(effects).span_dimension() < 9)
    throw ValidationError("linear_inversion_qpt: measurement set is not informationally complete");
  const auto x = design_operators(probes_exact, effects);
  const auto& basis = operator_basis_9();
  const auto rows = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(rows, 81);
  Eigen::VectorXd f(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t p = static_cast<std::size_t>(r) / effects.size(), k = static_cast<std::size_t>(r) % effects.size();
    if (frequencies[p].size() != effects.size()) throw ValidationError("linear_inversion_qpt: effect count mismatch");
    for (int m = 0; m < 81; ++m) a(r, m) = trace_product(basis[m], x[static_cast<std::size_t>(r)]);
    f(r) = frequencies[p][k];
  }
  const Eigen::VectorXd c = a.completeOrthogonalDecomposition().solve(f);
  Mat9 j = Mat9::Zero();
  for (int m = 0; m < 81; ++m) j += c(m) * basis[m];
  ProcessEstimate est;
  est.choi = ChoiMatrix(hermitian_part(j));
  est.method = "linear";
  est.converged = true;
  est.cp_violation = std::max(0.0, -hermitian_eigenvalues(est.choi.matrix()).minCoeff());
  return est;
}

ProcessEstimate linear_inversion_qpt(const ExperimentData& data, const std::vector<DensityMatrix>& probes_exact) {
  std::vector<std::vector<double>> freqs;
  for (const auto& row : data.counts) {
    double total = 0.0;
    for (auto n : row) total += static_cast<double>(n);
    if (!(total > 0.0)) throw ValidationError("linear_inversion_qpt: probe with no counts");
    std::vector<double> f;
    for (auto n : row) f.push_back(static_cast<double>(n) / total);
    freqs.push_back(std::move(f));
  }
  auto est = linear_inversion_qpt(freqs, probes_exact, data.effects);
  est.loglikelihood = process_loglikelihood(est.choi.matrix(), data, probes_exact);
  return est;
}

// --- maximum likelihood ---------------------------------------------------------------

namespace {

struct LikelihoodTerms {
  std::vector<Mat9> x;
  std::vector<double> n;
  double total = 0.0;
};

LikelihoodTerms likelihood_terms(const ExperimentData& data, const std::vector<DensityMatrix>& probes) {
  if (data.counts.size() != probes.size()) throw ValidationError("qpt: probe count mismatch");
  LikelihoodTerms t;
  const auto x = design_operators(probes, data.effects);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    if (data.counts[p].size() != data.effects.size()) throw ValidationError("qpt: effect count mismatch");
    for (std::size_t k = 0; k < data.effects.size(); ++k) {
      const auto n = static_cast<double>(data.counts[p][k]);
      if (n == 0.0) continue;
      t.x.push_back(x[p * data.effects.size() + k]);
      t.n.push_back(n);
      t.total += n;
    }
  }
  if (!(t.total > 0.0)) throw ValidationError("qpt: dataset has no counts");
  return t;
}

double loglikelihood(const Mat9& j, const LikelihoodTerms& t) {
  double ll = 0.0;
  for (std::size_t i = 0; i < t.x.size(); ++i) ll += t.n[i] * std::log(std::max(trace_product(j, t.x[i]), kProbFloor));
  return ll;
}

Mat9 tp_normalize(const Mat9& k) {
  const Mat3 a = inv_sqrt_pd(partial_trace_output(k));
  const Mat9 l = kron(a, Mat3::Identity());
  return hermitian_part(Mat9(l * k * l));
}

}  // namespace

double process_loglikelihood(const Mat9& choi, const ExperimentData& data, const std::vector<DensityMatrix>& probes) {
  return loglikelihood(choi, likelihood_terms(data, probes));
}

ProcessEstimate mle_qpt(const ExperimentData& data, const std::vector<DensityMatrix>& probes_exact,
                        const MleOptions& options) {
  const LikelihoodTerms terms = likelihood_terms(data, probes_exact);
  Mat9 j = Mat9::Identity() / 3.0;
  double ll = loglikelihood(j, terms);
  ProcessEstimate est;
  est.method = "mle";
  est.identifiability_deficit = 9 - probe_rank(probes_exact);
  est.loglikelihood_trace.push_back(ll);
  // M = 1l + t (R - 1l): t < 1 is the diluted step, t > 1 over-relaxes.
  double t = options.initial_step;
  const double scale = 3.0 / terms.total;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    Mat9 r = Mat9::Zero();
    for (std::size_t i = 0; i < terms.x.size(); ++i)
      r += (terms.n[i] / std::max(trace_product(j, terms.x[i]), kProbFloor)) * terms.x[i];
    const Mat9 step_dir = hermitian_part(Mat9(scale * r)) - Mat9::Identity();
    bool accepted = false;
    double gain = 0.0;
    while (t >= 1e-10) {
      const Mat9 m = Mat9::Identity() + t * step_dir;
      const Mat9 trial = tp_normalize(m * j * m);
      const double ll_trial = loglikelihood(trial, terms);
      if (ll_trial > ll) {
        gain = ll_trial - ll;
        j = trial;
        ll = ll_trial;
        accepted = true;
        t = std::min(2.0 * t, options.max_step);
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      est.converged = true;
      break;
    }
    est.loglikelihood_trace.push_back(ll);
    if (gain < options.tolerance) {
      est.converged = true;
      ++it;
      break;
    }
  }
  est.iterations = it;
  est.choi = ChoiMatrix(j);
  est.loglikelihood = ll;
  est.cp_violation = std::max(0.0, -hermitian_eigenvalues(j).minCoeff());
  return est;
}

// --- state tomography -------------------------------------------------------------------

DensityMatrix project_to_density(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(hermitian_part(m));
  const Eigen::VectorXd lambda = project_to_simplex(es.eigenvalues());
  const Mat3 rho = es.eigenvectors() * lambda.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return DensityMatrix::renormalized(rho, 1e-9, 1e-12);
}

DensityMatrix state_tomography(const std::vector<double>& frequencies, const MeasurementSet& ms) {
  if (frequencies.size() != ms.size()) throw ValidationError("state_tomography: frequency count mismatch");
  if (!ms.informationally_complete())
    throw ValidationError("state_tomography: measurement set is not informationally complete");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(ms.size()), 9);
  Eigen::VectorXd f(static_cast<Eigen::Index>(ms.size()));
  for (std::size_t k = 0; k < ms.size(); ++k) {
    a.row(static_cast<Eigen::Index>(k)) = coordinates_of(ms.effects(), k);
    f(static_cast<Eigen::Index>(k)) = frequencies[k];
  }
  const RealVec9 c = a.completeOrthogonalDecomposition().solve(f);
  return project_to_density(operator_from_coordinates(c));
}

DensityMatrix state_tomography(const std::vector<std::uint64_t>& counts, const MeasurementSet& ms) {
  double total = 0.0;
  for (auto n : counts) total += static_cast<double>(n);
  if (!(total > 0.0)) throw ValidationError("state_tomography: no counts");
  std::vector<double> f;
  for (auto n : counts) f.push_back(static_cast<double>(n) / total);
  return state_tomography(f, ms);
}

// --- average process infidelity ---------------------------------------------------------

ApiMode parse_api_mode(const std::string& name) {
  if (name == "oracle") return ApiMode::oracle;
  if (name == "empirical") return ApiMode::empirical;
  throw ValidationError("unknown API mode '" + name + "' (expected oracle or empirical)");
}

ApiReport api_between(const Superoperator& truth, const Superoperator& model, const ApiOptions& options) {
  if (options.n_states < 1) throw DomainError("api_between: n_states must be >= 1");
  const MeasurementSet& ms = default_measurement_set();
  ApiReport rep;
  rep.infidelities.resize(static_cast<std::size_t>(options.n_states));
  for (int i = 0; i < options.n_states; ++i) {
    const std::uint64_t state_seed = derive_seed(options.seed, static_cast<std::uint64_t>(i));
    const DensityMatrix rho = DensityMatrix::from_pure(haar_random_state(state_seed));
    double f = 0.0;
    if (options.mode == ApiMode::oracle) {
      const Mat3 out_true = project_to_density(apply_raw(truth, rho.matrix())).matrix();
      const Mat3 out_model = project_to_density(apply_raw(model, rho.matrix())).matrix();
      f = fidelity(out_true, out_model);
    } else {
      if (options.shots < 1) throw ValidationError("api_between: shots must be >= 1");
      Rng rng_in = make_rng(state_seed, 1), rng_out = make_rng(state_seed, 2);
      const DensityMatrix rho_in =
          state_tomography(sample_multinomial(checked_probabilities(ms.effects(), rho.matrix()), options.shots, rng_in), ms);
      const Mat3 out = apply_raw(truth, rho.matrix());
      const DensityMatrix rho_out =
          state_tomography(sample_multinomial(checked_probabilities(ms.effects(), out), options.shots, rng_out), ms);
      const DensityMatrix predicted = project_to_density(apply_raw(model, rho_in.matrix()));
      f = fidelity(rho_out, predicted);
    }
    rep.infidelities[static_cast<std::size_t>(i)] = std::clamp(1.0 - f, 0.0, 1.0);
  }
  for (double v : rep.infidelities) rep.mean += v;
  rep.mean /= options.n_states;
  rep.standard_error = standard_error(rep.infidelities);
  return rep;
}

std::vector<double> default_api_x_grid() {
  std::vector<double> xs;
  for (int i = 0; i <= 10; ++i) xs.push_back(0.05 * i);
  xs.push_back(two_design_fiducial_x());
  std::sort(xs.begin(), xs.end());
  return xs;
}

ApiSweepResult api_sweep(const ApiSweepConfig& config) {
  if (config.shots < 1) throw ValidationError("api_sweep: shots must be >= 1");
  if (config.n_seeds < 1 || config.n_states < 1 || config.n_probes < 1)
    throw ValidationError("api_sweep: seeds, states and probes must be >= 1");
  for (double x : config.x_list) fiducial_state(x);
  for (double g : config.gamma_list)
    if (!(g >= 0.0)) throw DomainError("api_sweep: gamma must be >= 0");
  const std::size_t nx = config.x_list.size(), ng = config.gamma_list.size();
  const auto ns = static_cast<std::size_t>(config.n_seeds);
  const MeasurementSet& ms = default_measurement_set();
  // Populate the rotation cache before spawning workers.
  probe_rotations(config.n_probes, config.scheme, config.master_seed);

  ApiSweepResult result;
  result.runs.resize(ng * nx * ns);
  parallel_for(result.runs.size(), config.threads, [&](std::size_t task) {
    const std::size_t gi = task / (nx * ns), xi = (task / ns) % nx, si = task % ns;
    const double x = config.x_list[xi], gamma = config.gamma_list[gi];
    const std::uint64_t seed_root = derive_seed(config.master_seed, si);
    const auto rotations = probe_rotations(config.n_probes, config.scheme, derive_seed(seed_root, 7));
    const ProbeSet probes = make_probe_set(x, rotations);
    const Superoperator truth = jitter_exact(gamma);
    const std::uint64_t data_seed = derive_seed(derive_seed(seed_root, 11), gi * 4096 + xi);
    const ExperimentData data = simulate_process_data(truth, probes, ms, config.shots, data_seed);
    const ProcessEstimate est = mle_qpt(data, probes.states, config.mle);
    ApiOptions api_opts;
    api_opts.n_states = config.n_states;
    api_opts.seed = derive_seed(seed_root, 13);
    const ApiReport rep = api_between(truth, est.superoperator(), api_opts);
    std::vector<Mat3> ops;
    for (const auto& s : probes.states) ops.push_back(s.matrix());
    ApiRun& run = result.runs[task];
    run.x = x;
    run.gamma = gamma;
    run.seed_index = static_cast<int>(si);
    run.api = rep.mean;
    run.api_se = rep.standard_error;
    run.mle_iterations = est.iterations;
    run.min_eig = uniformity_report(gram_of_projectors(ops)).min_eig;
  });

  for (std::size_t gi = 0; gi < ng; ++gi) {
    for (std::size_t xi = 0; xi < nx; ++xi) {
      std::vector<double> v;
      for (std::size_t si = 0; si < ns; ++si) v.push_back(result.runs[(gi * nx + xi) * ns + si].api);
      ApiSummary s;
      s.x = config.x_list[xi];
      s.gamma = config.gamma_list[gi];
      for (double a : v) s.api_mean += a;
      s.api_mean /= static_cast<double>(v.size());
      s.api_se = standard_error(v);
      s.seeds = config.n_seeds;
      result.summary.push_back(s);
    }
  }
  return result;
}

}  // namespace biphoton
