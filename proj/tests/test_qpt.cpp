#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "biphoton/errors.hpp"
#include "biphoton/qpt.hpp"
#include "oracles.hpp"

using namespace biphoton;

namespace {

ProbeSet probes_for(double x) { return make_probe_set(x, probe_rotations(10, ProbeScheme::design)); }

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST_SUITE("qpt") {
  TEST_CASE("default measurement set") {
    const auto& ms = default_measurement_set();
    CHECK(ms.size() == 10);
    Mat3 sum = Mat3::Zero();
    for (const auto& e : ms.effects()) sum += e;
    CHECK(max_abs_diff(sum, Mat3::Identity()) < 1e-10);
    CHECK(ms.span_dimension() == 9);
    CHECK(ms.informationally_complete());
    for (const auto& e : ms.effects())
      CHECK((e * DensityMatrix::maximally_mixed().matrix()).trace().real() == doctest::Approx(0.1).epsilon(1e-12));
  }

  TEST_CASE("measurement set validation") {
    CHECK_THROWS_AS(MeasurementSet({Mat3(Mat3::Identity() * 0.5)}), ValidationError);
    Mat3 neg = Mat3::Identity();
    neg(0, 0) = -1.0;
    CHECK_THROWS_AS(MeasurementSet({neg, Mat3(Mat3::Identity() - neg)}), ValidationError);
    std::vector<Mat3> basis;
    for (int i = 0; i < 3; ++i) {
      Mat3 p = Mat3::Zero();
      p(i, i) = 1;
      basis.push_back(p);
    }
    const MeasurementSet z(basis);
    CHECK(z.span_dimension() == 3);
    CHECK_FALSE(z.informationally_complete());
  }

  TEST_CASE("probe sets") {
    CHECK(probe_rank(probes_for(0.0).states) == 9);
    CHECK(probe_rank(probes_for(two_design_fiducial_x()).states) == 9);
    CHECK(probe_rank(probes_for(0.5).states) == 6);
    const auto noisy = make_probe_set(0.2, probe_rotations(10, ProbeScheme::design), {0.1});
    CHECK(purity(noisy.states[0]) < 1.0);
    CHECK(noisy.rotations.size() == 10);
  }

  TEST_CASE("Born rule and sampling") {
    const auto ps = probes_for(0.0);
    const auto& ms = default_measurement_set();
    const auto p = born_probabilities(Superoperator::identity(), ps.states, ms.effects());
    for (std::size_t i = 0; i < ps.states.size(); ++i)
      for (std::size_t k = 0; k < ms.size(); ++k)
        CHECK(std::abs(p[i][k] - (ms.effects()[k] * ps.states[i].matrix()).trace().real()) < 1e-15);

    const auto a = simulate_process_data(jitter_exact(0.5), ps, ms, 1000, 42);
    const auto b = simulate_process_data(jitter_exact(0.5), ps, ms, 1000, 42);
    CHECK(a.counts == b.counts);
    for (const auto& row : a.counts) CHECK(std::accumulate(row.begin(), row.end(), std::uint64_t{0}) == 1000);

    const std::uint64_t n = 1000000;
    const auto big = simulate_process_data(jitter_exact(0.5), ps, ms, n, 7);
    const auto q = born_probabilities(jitter_exact(0.5), ps.states, ms.effects());
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t k = 0; k < q[i].size(); ++k) {
        const double sd = std::sqrt(q[i][k] * (1 - q[i][k]) / static_cast<double>(n));
        CHECK(std::abs(static_cast<double>(big.counts[i][k]) / n - q[i][k]) < 5 * sd + 1e-12);
      }
    CHECK_THROWS_AS(born_probabilities(Superoperator(Mat9(-Mat9::Identity())), ps.states, ms.effects()),
                    ConsistencyError);
  }

  TEST_CASE("linear inversion is exact at exact probabilities") {
    const auto& ms = default_measurement_set();
    for (double x : {0.0, two_design_fiducial_x()}) {
      const auto ps = probes_for(x);
      const auto id = linear_inversion_qpt(born_probabilities(Superoperator::identity(), ps.states, ms.effects()),
                                           ps.states, ms.effects());
      CHECK(max_abs_diff(id.superoperator().matrix(), Mat9::Identity()) < 1e-8);
      for (std::uint64_t s = 0; s < 20; ++s) {
        const auto e = random_cptp(100 + s, 1 + static_cast<int>(s % 4));
        const auto est = linear_inversion_qpt(born_probabilities(e, ps.states, ms.effects()), ps.states, ms.effects());
        CHECK(max_abs_diff(est.superoperator().matrix(), e.matrix()) < 1e-8);
      }
      for (double g : {0.5, 1.5}) {
        const auto e = jitter_exact(g);
        const auto est = linear_inversion_qpt(born_probabilities(e, ps.states, ms.effects()), ps.states, ms.effects());
        CHECK(max_abs_diff(est.superoperator().matrix(), e.matrix()) < 1e-8);
      }
    }
  }

  TEST_CASE("N00N probes are incomplete") {
    const auto& ms = default_measurement_set();
    const auto ps = probes_for(0.5);
    try {
      linear_inversion_qpt(born_probabilities(Superoperator::identity(), ps.states, ms.effects()), ps.states,
                           ms.effects());
      FAIL("expected IncompleteProbeSetError");
    } catch (const IncompleteProbeSetError& e) {
      CHECK(e.null_space_dim() == 3);
    }
    const auto data = simulate_process_data(Superoperator::identity(), ps, ms, 1000, 1);
    CHECK(mle_qpt(data, ps.states).identifiability_deficit == 3);
  }

  TEST_CASE("MLE: monotone, physical, accurate") {
    const auto& ms = default_measurement_set();
    const auto ps = probes_for(0.0);
    const auto data = simulate_process_data(Superoperator::identity(), ps, ms, 100000, 3);
    const auto est = mle_qpt(data, ps.states);
    for (std::size_t i = 1; i < est.loglikelihood_trace.size(); ++i)
      CHECK(est.loglikelihood_trace[i] >= est.loglikelihood_trace[i - 1]);
    CHECK(is_cptp(est.choi, 1e-6).ok());
    CHECK(est.loglikelihood == doctest::Approx(process_loglikelihood(est.choi.matrix(), data, ps.states)));
    ApiOptions o;
    o.seed = 5;
    const double api = api_between(Superoperator::identity(), est.superoperator(), o).mean;
    CHECK(api < 5e-3);
    const auto coarse = mle_qpt(simulate_process_data(Superoperator::identity(), ps, ms, 10000, 3), ps.states);
    CHECK(api < api_between(Superoperator::identity(), coarse.superoperator(), o).mean);
    // starting point is the completely depolarizing channel
    CHECK(est.loglikelihood_trace.front() ==
          doctest::Approx(process_loglikelihood(Mat9(Mat9::Identity() / 3.0), data, ps.states)));
  }

  TEST_CASE("MLE beats linear inversion in likelihood and stays CPTP") {
    const auto& ms = default_measurement_set();
    const auto ps = probes_for(two_design_fiducial_x());
    const auto data = simulate_process_data(jitter_exact(1.5), ps, ms, 2000, 9);
    const auto est = mle_qpt(data, ps.states);
    CHECK(is_cptp(est.choi, 1e-6).ok());
    CHECK(est.cp_violation <= 1e-6);
    const auto lin = linear_inversion_qpt(data, ps.states);
    CHECK(lin.method != est.method);
  }

  TEST_CASE("MLE copes with zero counts") {
    const auto& ms = default_measurement_set();
    auto ps = probes_for(0.0);
    auto data = simulate_process_data(Superoperator::identity(), ps, ms, 500, 2);
    for (auto& row : data.counts) {
      const std::uint64_t moved = row[0] + row[1];
      row[0] = row[1] = 0;
      row[2] += moved;
    }
    const auto est = mle_qpt(data, ps.states);
    CHECK(std::isfinite(est.loglikelihood));
    CHECK(is_cptp(est.choi, 1e-6).ok());
    for (std::size_t i = 1; i < est.loglikelihood_trace.size(); ++i)
      CHECK(est.loglikelihood_trace[i] >= est.loglikelihood_trace[i - 1]);
  }

  TEST_CASE("design probes beat coherent probes on strong jitter") {
    const auto& ms = default_measurement_set();
    const auto truth = jitter_exact(1.5);
    int wins = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      ApiOptions o;
      o.seed = derive_seed(s, 99);
      double api[2];
      int i = 0;
      for (double x : {two_design_fiducial_x(), 0.0}) {
        const auto ps = probes_for(x);
        const auto est = mle_qpt(simulate_process_data(truth, ps, ms, 10000, derive_seed(s, i)), ps.states);
        api[i++] = api_between(truth, est.superoperator(), o).mean;
      }
      wins += api[0] < api[1] ? 1 : 0;
    }
    CHECK(wins > 5);
  }

  TEST_CASE("state tomography") {
    const auto& ms = default_measurement_set();
    const auto psi = DensityMatrix::from_pure(haar_random_state(3));
    std::vector<double> f;
    for (const auto& e : ms.effects()) f.push_back((e * psi.matrix()).trace().real());
    CHECK(max_abs_diff(state_tomography(f, ms).matrix(), psi.matrix()) < 1e-8);

    Rng rng(4);
    std::vector<std::uint64_t> counts(ms.size(), 0);
    std::discrete_distribution<std::size_t> d(10, 0.0, 1.0, [](double) { return 1.0; });
    for (int k = 0; k < 100000; ++k) ++counts[d(rng)];
    const auto est = state_tomography(counts, ms);
    const Eigen::Vector3d ev = hermitian_eigenvalues(Mat3(est.matrix() - Mat3::Identity() / 3.0));
    CHECK(0.5 * ev.cwiseAbs().sum() < 0.01);

    const Mat3 neg = Eigen::Vector3d(1.2, 0.1, -0.3).cast<cplx>().asDiagonal();
    const auto p = project_to_density(neg);
    CHECK(hermitian_eigenvalues(p.matrix()).minCoeff() >= -1e-15);
    CHECK(std::abs(p.matrix().trace() - 1.0) < 1e-12);
    CHECK_THROWS_AS(state_tomography(std::vector<double>(3, 0.1), ms), ValidationError);
  }

  TEST_CASE("API identities") {
    const auto e = jitter_exact(0.7);
    ApiOptions o;
    o.n_states = 40;
    CHECK(api_between(e, e, o).mean < 1e-12);
    const auto r = api_between(Superoperator::identity(), complete_depolarizer(), o);
    CHECK(std::abs(r.mean - 2.0 / 3.0) <= 2 * r.standard_error + 1e-12);
    for (double v : api_between(e, random_cptp(3), o).infidelities) CHECK(v >= 0.0);
    CHECK(parse_api_mode("empirical") == ApiMode::empirical);
    CHECK_THROWS_AS(parse_api_mode("exact"), ValidationError);
  }

  TEST_CASE("API against a brute-force Haar average") {
    const oracle::M9 d = oracle::jitter_by_quadrature(0.5);
    std::mt19937_64 rng(2024);
    const int n = 100000;
    double s = 0;
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector3cd v = oracle::haar_vector(rng);
      const oracle::M3 out = oracle::apply(d, v * v.adjoint());
      s += 1.0 - (v.adjoint() * out * v)(0, 0).real();
    }
    const double brute = s / n;
    ApiOptions o;
    o.n_states = 2000;
    o.seed = 17;
    const auto r = api_between(Superoperator::identity(), jitter_exact(0.5), o);
    CHECK(std::abs(r.mean - brute) < 3 * r.standard_error);
  }

  TEST_CASE("API is invariant under common unitary conjugation") {
    Rng rng(77);
    const auto e = jitter_exact(0.9), f = random_cptp(8, 2);
    ApiOptions o;
    o.n_states = 400;
    o.seed = 3;
    const auto base = api_between(e, f, o);
    for (int k = 0; k < 10; ++k) {
      const auto u = Superoperator::unitary(haar_random_su2(rng));
      const Mat9 um = u.matrix(), uinv = um.adjoint();
      const Superoperator ec(Mat9(um * e.matrix() * uinv)), fc(Mat9(um * f.matrix() * uinv));
      const auto moved = api_between(ec, fc, o);
      const double se = std::hypot(base.standard_error, moved.standard_error);
      CHECK(std::abs(moved.mean - base.mean) < 2 * se);
    }
  }

  TEST_CASE("empirical API approaches the oracle value with shots") {
    const auto truth = jitter_exact(0.5);
    const auto model = jitter_exact(0.6);
    ApiOptions o;
    o.n_states = 40;
    o.seed = 8;
    const double oracle_api = api_between(truth, model, o).mean;
    o.mode = ApiMode::empirical;
    double prev = 1.0;
    for (std::uint64_t shots : {1000u, 10000u, 100000u}) {
      o.shots = shots;
      const double gap = std::abs(api_between(truth, model, o).mean - oracle_api);
      CHECK(gap < prev);
      prev = gap;
    }
  }

  TEST_CASE("api_sweep: determinism and error amplification") {
    ApiSweepConfig c;
    c.x_list = default_api_x_grid();
    c.gamma_list = {1.5};
    c.n_seeds = 2;
    c.n_states = 20;
    c.threads = 4;
    const auto a = api_sweep(c);
    c.threads = 1;
    const auto b = api_sweep(c);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) CHECK(a.runs[i].api == b.runs[i].api);
    REQUIRE(a.summary.size() == c.x_list.size());

    std::vector<double> api, inv_min;
    for (std::size_t xi = 0; xi < c.x_list.size(); ++xi) {
      api.push_back(a.summary[xi].api_mean);
      inv_min.push_back(1.0 / std::max(a.runs[xi * 2].min_eig, 1e-300));
    }
    CHECK(spearman(api, inv_min) > 0.8);
  }

  TEST_CASE("api_sweep validation") {
    ApiSweepConfig c;
    c.x_list = {0.1};
    c.shots = 0;
    CHECK_THROWS_AS(api_sweep(c), ValidationError);
    c.shots = 10;
    c.x_list = {1.5};
    CHECK_THROWS_AS(api_sweep(c), DomainError);
  }

  TEST_CASE("default sweep grid") {
    const auto g = default_api_x_grid();
    CHECK(g.size() == 12);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(std::find(g.begin(), g.end(), two_design_fiducial_x()) != g.end());
  }
}
