#pragma once

// Simulated process tomography on the spin-1 space.

#include <cstdint>
#include <string>
#include <vector>

#include "biphoton/channels.hpp"
#include "biphoton/ensembles.hpp"
#include "biphoton/spinspace.hpp"

namespace biphoton {

class MeasurementSet {
 public:
  /// Validates PSD effects (-1e-10) summing to the identity within 1e-10.
  explicit MeasurementSet(std::vector<Mat3> effects);

  const std::vector<Mat3>& effects() const { return effects_; }
  std::size_t size() const { return effects_.size(); }
  /// Dimension of the real span of the effects.
  int span_dimension() const;
  bool informationally_complete() const { return span_dimension() == 9; }

 private:
  std::vector<Mat3> effects_;
};

/// (3/10) |phi_i><phi_i| over the 10-state design orbit of psi_{x*}.
const MeasurementSet& default_measurement_set();

/// Realized probe states with the descriptors they were built from.
struct ProbeSet {
  double x = 0.0;
  double epsilon = 0.0;
  std::vector<EulerAngles> rotations;
  std::vector<DensityMatrix> states;
};

ProbeSet make_probe_set(double x, const std::vector<Su2Element>& rotations, const ImpurityModel& impurity = {});

/// Rank of the Hilbert-Schmidt Gram matrix of the probe states.
int probe_rank(const std::vector<DensityMatrix>& probes);

struct ExperimentData {
  ProbeSet probes;
  std::vector<Mat3> effects;
  std::vector<std::vector<std::uint64_t>> counts;  // [probe][effect]
  std::uint64_t shots = 0;                         // per probe
  std::uint64_t seed = 0;
};

/// Born probabilities Tr(E_k E[rho_p]), [probe][effect]. Throws
/// ConsistencyError if any leaves [0,1] by more than 1e-9.
std::vector<std::vector<double>> born_probabilities(const Superoperator& e, const std::vector<DensityMatrix>& probes,
                                                    const std::vector<Mat3>& effects);

/// Multinomial counts per probe; probe p draws from derive_seed(seed, p).
ExperimentData simulate_process_data(const Superoperator& e, const ProbeSet& probes, const MeasurementSet& ms,
                                     std::uint64_t shots, std::uint64_t seed);

struct ProcessEstimate {
  ChoiMatrix choi{Mat9::Identity() / 3.0};
  std::string method;
  double loglikelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double cp_violation = 0.0;  // max(0, -min eig of the Choi matrix)
  int identifiability_deficit = 0;
  std::vector<double> loglikelihood_trace;

  Superoperator superoperator() const { return from_choi(choi); }
};

/// Least squares over the 81 real Choi coordinates. Throws
/// IncompleteProbeSetError when the probe states do not span all operators.
ProcessEstimate linear_inversion_qpt(const ExperimentData& data, const std::vector<DensityMatrix>& probes_exact);
ProcessEstimate linear_inversion_qpt(const std::vector<std::vector<double>>& frequencies,
                                     const std::vector<DensityMatrix>& probes_exact, const std::vector<Mat3>& effects);

struct MleOptions {
  int max_iterations = 5000;
  double tolerance = 1e-10;  // stop when an accepted step gains less
  double initial_step = 0.5;
  double max_step = 64.0;
};

/// R J R iteration with trace-preservation renormalization, started from the
/// completely depolarizing channel. The step M = 1l + t (R - 1l) is diluted
/// (t < 1) or over-relaxed (t > 1) adaptively; a step is accepted only if the
/// log-likelihood increases.
ProcessEstimate mle_qpt(const ExperimentData& data, const std::vector<DensityMatrix>& probes_exact,
                        const MleOptions& options = {});

/// Multinomial log-likelihood sum n log max(p, 1e-12), zero counts skipped.
double process_loglikelihood(const Mat9& choi, const ExperimentData& data, const std::vector<DensityMatrix>& probes);

/// Closest unit-trace PSD matrix in Frobenius norm.
DensityMatrix project_to_density(const Mat3& m);

/// Linear inversion of the frequencies, then project_to_density.
DensityMatrix state_tomography(const std::vector<std::uint64_t>& counts, const MeasurementSet& ms);
DensityMatrix state_tomography(const std::vector<double>& frequencies, const MeasurementSet& ms);

enum class ApiMode { oracle, empirical };
ApiMode parse_api_mode(const std::string& name);

struct ApiOptions {
  int n_states = 40;
  std::uint64_t seed = 0;
  ApiMode mode = ApiMode::oracle;
  std::uint64_t shots = 10000;  // per tomography, empirical mode only
};

struct ApiReport {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> infidelities;
};

/// Mean of 1 - F over Haar-random pure inputs. `truth` is the process that
/// runs; `model` the one whose predictions are scored. Non-physical outputs of
/// `model` are projected onto the state space before scoring.
ApiReport api_between(const Superoperator& truth, const Superoperator& model, const ApiOptions& options = {});

struct ApiSweepConfig {
  std::vector<double> x_list;
  std::vector<double> gamma_list{0.5, 1.5};
  std::uint64_t shots = 10000;
  int n_states = 40;
  int n_seeds = 10;
  int n_probes = 10;
  std::uint64_t master_seed = 0;
  int threads = 1;
  ProbeScheme scheme = ProbeScheme::design;
  MleOptions mle;
};

/// Default sweep grid: 0, 0.05, ..., 0.5 plus x*.
std::vector<double> default_api_x_grid();

struct ApiRun {
  double x = 0.0;
  double gamma = 0.0;
  int seed_index = 0;
  double api = 0.0;
  double api_se = 0.0;  // over evaluation states
  int mle_iterations = 0;
  double min_eig = 0.0;  // probe Gram
};

struct ApiSummary {
  double x = 0.0;
  double gamma = 0.0;
  double api_mean = 0.0;
  double api_se = 0.0;  // over seeds
  int seeds = 0;
};

struct ApiSweepResult {
  std::vector<ApiRun> runs;  // ordered by gamma, x, seed
  std::vector<ApiSummary> summary;
};

/// For each (x, gamma, seed): probe orbit of psi_x, data through
/// jitter_exact(gamma), MLE, oracle API against the truth. Evaluation states
/// are shared across x for a given seed.
ApiSweepResult api_sweep(const ApiSweepConfig& config);

}  // namespace biphoton
