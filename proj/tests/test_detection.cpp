#include <doctest.h>

#include <cmath>
#include <random>

#include "biphoton/detection.hpp"
#include "biphoton/errors.hpp"
#include "oracles.hpp"

using namespace biphoton;

namespace {

// <psi_x| D[psi_x psi_x^dagger] |psi_x> from the quadrature channel
double survival_oracle(double x, double gamma) {
  const oracle::M9 d = oracle::jitter_by_quadrature(gamma);
  const Eigen::Vector3cd psi = oracle::fiducial(x).cast<oracle::cplx>();
  const oracle::M3 out = oracle::apply(d, psi * psi.adjoint());
  return (psi.adjoint() * out * psi)(0, 0).real();
}

DensityMatrix random_real_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Matrix3d g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = n(rng);
  const Eigen::Matrix3d r = g * g.transpose();
  return DensityMatrix(Mat3((r / r.trace()).cast<cplx>()));
}

}  // namespace

TEST_SUITE("detection") {
  TEST_CASE("coefficients") {
    auto k = coefficients(0.0);
    CHECK(k.A == doctest::Approx(1.0 / 15.0).epsilon(1e-14));
    CHECK(k.B == doctest::Approx(2.0 / 5.0).epsilon(1e-14));
    CHECK(k.C == doctest::Approx(8.0 / 15.0).epsilon(1e-14));
    k = coefficients(0.5);
    CHECK(k.A == doctest::Approx(4.0 / 15.0).epsilon(1e-14));
    CHECK(k.B == doctest::Approx(4.0 / 15.0).epsilon(1e-14));
    CHECK(k.C == doctest::Approx(7.0 / 15.0).epsilon(1e-14));
    for (int i = 0; i <= 100; ++i) CHECK(std::abs(coefficients(i / 100.0).sum() - 1.0) < 1e-12);
    // symmetric under x -> 1 - x
    CHECK(coefficients(0.2).A == doctest::Approx(coefficients(0.8).A).epsilon(1e-14));
  }

  TEST_CASE("closed form against the quadrature channel") {
    for (double x : {0.0, 0.13, 0.5, 0.71})
      for (double g : {0.2, 0.9, 1.7}) CHECK(std::abs(nondetection_probability(x, g) - survival_oracle(x, g)) < 1e-10);
  }

  TEST_CASE("nondetection probability values") {
    for (double x : {0.0, 0.3, 0.5, 1.0}) CHECK(nondetection_probability(x, 0.0) == 1.0);
    CHECK(nondetection_probability(0.5, 0.5) == doctest::Approx(0.8637).epsilon(5e-5));
    CHECK(nondetection_probability(0.5, 0.5) == doctest::Approx(0.863741).epsilon(1e-6));
    CHECK(nondetection_probability(0.0, 30.0) == doctest::Approx(8.0 / 15.0).epsilon(1e-14));
  }

  TEST_CASE("channel route matches closed form on a grid") {
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double x = i / 19.0, g = 0.1 * j;
        const auto rho = DensityMatrix::from_pure(fiducial_state(x));
        CHECK(std::abs(nondetection_probability_channel(rho, x, g) - nondetection_probability(x, g)) < 1e-9);
      }
    const auto mixed = depolarize_fiducial(0.3, {0.1});
    CHECK(nondetection_probability_channel(mixed, 0.3, 0.0) == doctest::Approx(1.0 - 0.1 * 2.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("derivative against central differences") {
    const double h = 1e-5;
    for (double x : {0.0, 0.25, 0.5})
      for (double g : {0.05, 0.4, 1.0, 2.0}) {
        const double fd = (nondetection_probability(x, g + h) - nondetection_probability(x, g - h)) / (2 * h);
        CHECK(std::abs(fd - nondetection_derivative(x, g)) < 1e-6);
      }
  }

  TEST_CASE("P decreases strictly in gamma") {
    for (double x : {0.05, 0.2, 0.5, 0.9, 1.0}) {
      double prev = 1.0;
      for (int j = 1; j <= 300; ++j) {
        const double p = nondetection_probability(x, 0.01 * j);
        CHECK(p < prev);
        prev = p;
      }
    }
  }

  TEST_CASE("simulated detection") {
    for (double x : {0.0, 0.2, 0.5}) {
      const auto o = simulate_detection(x, 0.0, 5000, 3);
      CHECK(o.nondetections == o.trials);
    }
    CHECK(simulate_detection(0.3, 0.7, 1000, 9).nondetections == simulate_detection(0.3, 0.7, 1000, 9).nondetections);
    const std::uint64_t n = 100000;
    const auto o = simulate_detection(0.5, 0.5, n, 21);
    const double p = nondetection_probability(0.5, 0.5);
    CHECK(std::abs(o.p_hat() - p) < 5 * std::sqrt(p * (1 - p) / n));
  }

  TEST_CASE("PBS statistics") {
    auto s = pbs_statistics(DensityMatrix::from_pure(PureState(Vec3(1, 0, 0))));
    CHECK(s.a == doctest::Approx(1.0));
    CHECK(std::abs(s.b) < 1e-15);
    CHECK(std::abs(s.d) < 1e-15);
    CHECK(s.p_hv == doctest::Approx(0.5).epsilon(1e-14));
    s = pbs_statistics(DensityMatrix::maximally_mixed());
    CHECK(s.a == doctest::Approx(1.0 / 3.0));
    CHECK(s.p_hv == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    s = pbs_statistics(DensityMatrix::from_pure(fiducial_state(0.5)));
    CHECK(s.d == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(s.p_hv) < 1e-14);

    std::mt19937_64 rng(31);
    for (int k = 0; k < 100; ++k) {
      const auto rho = random_real_state(rng);
      const auto st = pbs_statistics(rho);
      CHECK(std::abs(st.p_hv - (0.5 - st.d - st.b / 2)) < 1e-10);
    }
  }

  TEST_CASE("indirect projection") {
    for (double x : {0.0, 0.3, 0.5, 0.9}) {
      const auto e = projection_from_stats(pbs_statistics(DensityMatrix::from_pure(fiducial_state(x))), x);
      CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(projection_from_stats(pbs_statistics(DensityMatrix::maximally_mixed()), 0.5).value ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    std::mt19937_64 rng(37);
    for (double x : {0.1, 0.3, 0.5})
      for (int k = 0; k < 100; ++k) {
        const auto rho = random_real_state(rng);
        const Vec3 psi = fiducial_state(x).amplitudes();
        const double direct = (psi.adjoint() * rho.matrix() * psi)(0, 0).real();
        CHECK(std::abs(projection_from_stats(pbs_statistics(rho), x).value - direct) < 1e-10);
      }
    PbsStatistics bad{0.5, 0.5, 0.5, 0.0, 0.25};
    CHECK_THROWS_AS(projection_from_stats(bad, 0.3), ValidationError);
    // tiny excursion above 1 is clamped and flagged
    PbsStatistics edge{0.5, 0.0, 0.5, 0.0, -2e-7};
    const auto c = projection_from_stats(edge, 0.5);
    CHECK(c.value == 1.0);
    CHECK(c.clamped);
  }

  TEST_CASE("sensitivity limits") {
    CHECK(sensitivity(0.0, 0.0, 1.0) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
    CHECK(sensitivity(0.5, 0.0, 1.0) == doctest::Approx(std::sqrt(6.0) / 4).epsilon(1e-12));
    CHECK(sensitivity(0.0, 0.0, 1.0) / sensitivity(0.5, 0.0, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    for (double x : {0.0, 0.2, 0.5}) CHECK(std::abs(sensitivity(x, 1e-4, 1.0) - sensitivity(x, 0.0, 1.0)) < 1e-6);
    CHECK(sensitivity(0.3, 0.6, 400.0) == doctest::Approx(sensitivity(0.3, 0.6, 1.0) / 20.0));
    CHECK(sensitivity(0.5, 0.0, 1e4) * 100.0 == doctest::Approx(std::sqrt(6.0) / 4));
  }

  TEST_CASE("N00N optimal at small gamma") {
    for (int j = 0; j <= 90; ++j) {
      const double g = 0.01 * j;
      for (int i = 0; i < 10; ++i) CHECK(sensitivity(0.5, g, 1.0) < sensitivity(0.05 * i, g, 1.0));
    }
  }

  TEST_CASE("sensitivity crossing") {
    const double c = sensitivity_crossing(0.5, 0.0);
    CHECK(c > 0.7);
    CHECK(c < 1.3);
    CHECK(std::abs(sensitivity(0.5, c, 1.0) - sensitivity(0.0, c, 1.0)) < 1e-9);
    CHECK(std::abs(sensitivity_crossing(0.5, 0.0, 0.5, 2.0) - c) < 1e-6);
    CHECK_THROWS_AS(sensitivity_crossing(0.3, 0.3), NotFoundError);
  }

  TEST_CASE("gamma estimation") {
    CHECK(estimate_gamma(1.0, 0.3).gamma == 0.0);
    CHECK(estimate_gamma(0.8637, 0.5).gamma == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(std::abs(estimate_gamma(nondetection_probability(0.5, 0.5), 0.5).gamma - 0.5) < 1e-6);
    for (double x : {0.1, 0.3, 0.5})
      for (double g = 0.05; g <= 2.0; g += 0.05)
        CHECK(std::abs(estimate_gamma(nondetection_probability(x, g), x).gamma - g) < 1e-6);
    const auto s = estimate_gamma(coefficients(0.2).C - 0.01, 0.2);
    CHECK(s.saturated);
    CHECK(std::isinf(s.gamma));
    CHECK_THROWS_AS(estimate_gamma(1.5, 0.2), DomainError);
  }

  TEST_CASE("detection curve fit") {
    std::vector<double> gs, ps;
    for (int j = 0; j <= 40; ++j) {
      gs.push_back(0.05 * j);
      ps.push_back(nondetection_probability(0.15, gs.back()));
    }
    const auto f = fit_detection_curve(gs, ps);
    const auto k = coefficients(0.15);
    CHECK(f.A == doctest::Approx(k.A).epsilon(1e-8));
    CHECK(f.B == doctest::Approx(k.B).epsilon(1e-8));
    CHECK(f.C == doctest::Approx(k.C).epsilon(1e-8));

    // upward-biased data: unconstrained fit would exceed 1
    for (auto& p : ps) p = std::min(1.0, p + 0.02);
    const auto c = fit_detection_curve(gs, ps);
    CHECK(c.sum() <= 1.0 + 1e-12);
  }

  TEST_CASE("sweep rows") {
    const auto rows = detection_sweep({0.0, 0.5}, {0.0, 0.5, 1.0});
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].p == 1.0);
    CHECK(rows[4].p == doctest::Approx(0.863741).epsilon(1e-6));
    CHECK(rows[4].dp_dgamma < 0.0);
  }
}
