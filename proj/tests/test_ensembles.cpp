#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "biphoton/ensembles.hpp"
#include "biphoton/errors.hpp"
#include "oracles.hpp"

using namespace biphoton;

namespace {

void check_spectrum(const RealVec9& ev, std::vector<double> expect, double tol) {
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < 9; ++i) CHECK(std::abs(ev(i) - expect[static_cast<std::size_t>(i)]) < tol);
}

std::vector<double> case1() { return {1.0 / 3, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 12}; }
std::vector<double> case2() { return {1.0 / 3, 2.0 / 15, 2.0 / 15, 2.0 / 15, 2.0 / 15, 2.0 / 15, 0, 0, 0}; }
std::vector<double> case3() { return {1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 30, 1.0 / 30, 1.0 / 30, 1.0 / 30, 1.0 / 30}; }

double great_circle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

}  // namespace

TEST_SUITE("ensembles") {
  TEST_CASE("continuous Gram spectra of the three reference fiducials") {
    check_spectrum(gram_continuous(two_design_fiducial_x()).eigenvalues(), case1(), 1e-9);
    check_spectrum(gram_continuous(0.5).eigenvalues(), case2(), 1e-9);
    check_spectrum(gram_continuous(0.0).eigenvalues(), case3(), 1e-9);
  }

  TEST_CASE("continuous Gram agrees with an independent Euler-angle quadrature") {
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.8}) {
      const auto ev = gram_continuous(x).eigenvalues();
      const auto ref = oracle::sorted_spectrum(oracle::gram_by_quadrature(x, 12, 20));
      for (int i = 0; i < 9; ++i) CHECK(std::abs(ev(i) - ref(i)) < 1e-12);
    }
  }

  TEST_CASE("quadrature order doubling does not move the spectrum") {
    for (double x : {0.05, 0.3, 0.5}) {
      const auto a = gram_continuous(x).eigenvalues();
      const auto b = gram_continuous(x, {16, 32, 32}).eigenvalues();
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("Gram invariants") {
    Rng rng(4);
    std::vector<GramMatrix> grams{gram_continuous(0.2), gram_of_states({fiducial_state(0.3)}),
                                  gram_discrete(CovariantEnsemble::discrete(0.4, probe_rotations(10, ProbeScheme::haar, 3))),
                                  gram_of_states(mub_states_d3())};
    for (const auto& g : grams) {
      CHECK(g.trace() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(g.matrix()(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
      CHECK(g.eigenvalues().minCoeff() >= -1e-12);
      CHECK((g.matrix() - g.matrix().transpose()).cwiseAbs().maxCoeff() < 1e-15);
    }
  }

  TEST_CASE("single state has rank one") {
    const auto r = uniformity_report(gram_of_states({fiducial_state(0.3)}));
    CHECK(r.rank == 1);
  }

  TEST_CASE("translating an ensemble conjugates its Gram matrix") {
    Rng rng(12);
    const auto rots = probe_rotations(10, ProbeScheme::haar, 5);
    for (double x : {0.0, 0.15, 0.5}) {
      const auto v = haar_random_su2(rng);
      std::vector<Su2Element> moved;
      for (const auto& r : rots) moved.push_back(v * r);
      const RealMat9 m = gram_discrete(CovariantEnsemble::discrete(x, rots)).matrix();
      const GramMatrix mv = gram_discrete(CovariantEnsemble::discrete(x, moved));
      const RealMat9 r = hs_conjugation(v.spin1());
      CHECK((mv.matrix() - r * m * r.transpose()).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((mv.eigenvalues() - GramMatrix(m).eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("Haar-random ten-probe ensembles average to the continuous Gram") {
    RealMat9 mean = RealMat9::Zero();
    RealVec9 mean_spec = RealVec9::Zero();
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto g =
          gram_discrete(CovariantEnsemble::discrete(two_design_fiducial_x(), probe_rotations(10, ProbeScheme::haar, s)));
      mean += g.matrix() / 100.0;
      mean_spec += g.eigenvalues() / 100.0;
    }
    check_spectrum(GramMatrix(mean).eigenvalues(), case1(), 0.02);
    // a single 10-state draw is far from flat: the top eigenvalue sits well above 1/3
    CHECK(mean_spec(8) > 1.0 / 3.0 + 0.02);
  }

  TEST_CASE("mutually unbiased bases") {
    const auto all = mub_states_d3(4);
    REQUIRE(all.size() == 12);
    CHECK(is_2design(gram_of_states(all)).is_design);
    // three bases only: {1/3, 1/9 x6, 0 x2}
    check_spectrum(gram_of_states(mub_states_d3(3)).eigenvalues(),
                   {1.0 / 3, 1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9, 1.0 / 9, 0, 0}, 1e-12);
  }

  TEST_CASE("Haar measure over all pure states is a 2-design") {
    const auto r = is_2design(gram_haar_pure_states());
    CHECK(r.is_design);
    CHECK(r.max_deviation < 1e-12);
  }

  TEST_CASE("2-design verdicts") {
    CHECK(is_2design(gram_continuous(0.1464466094067262)).is_design);
    const auto c3 = is_2design(gram_continuous(0.0));
    CHECK_FALSE(c3.is_design);
    CHECK(c3.max_deviation >= 1.0 / 12 - 1.0 / 30 - 1e-12);
    CHECK_FALSE(is_2design(gram_continuous(0.5)).is_design);
  }

  TEST_CASE("uniformity reports") {
    auto r = uniformity_report(gram_continuous(two_design_fiducial_x()));
    CHECK(r.min_eig == doctest::Approx(1.0 / 12).epsilon(1e-10));
    CHECK(r.rank == 9);
    r = uniformity_report(gram_continuous(0.5));
    CHECK(r.rank == 6);
    CHECK(std::abs(r.min_eig) < 1e-12);
    r = uniformity_report(gram_continuous(0.0));
    CHECK(r.min_eig == doctest::Approx(1.0 / 30).epsilon(1e-10));
    CHECK(r.identity_component == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }

  TEST_CASE("determinant curve") {
    std::vector<double> xs;
    for (int i = 0; i <= 500; ++i) xs.push_back(0.002 * i);
    const auto c1 = det_curve(xs, 1);
    const auto c4 = det_curve(xs, 4);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(c1[i].det == c4[i].det);
    // det is symmetric under x -> 1 - x, so look for the peak on [0, 1/2]
    const auto best = std::max_element(c1.begin(), c1.begin() + 251, [](const DetPoint& a, const DetPoint& b) {
      return a.det_norm < b.det_norm;
    });
    CHECK(std::abs(best->x - 0.1464) <= 0.002);
    CHECK(best->det_norm == doctest::Approx(1.0));
    CHECK(c1.back().x == doctest::Approx(1.0));
    CHECK(c1[250].det < 1e-12);
    // x -> 1 - x symmetry
    std::vector<double> ys;
    for (double x : xs) ys.push_back(1.0 - x);
    const auto mirrored = det_curve(ys, 2);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(c1[i].det - mirrored[i].det) < 1e-14);
    // minimum eigenvalue peaks at the same place
    const auto best_min = std::max_element(c1.begin(), c1.begin() + 251, [](const DetPoint& a, const DetPoint& b) {
      return a.min_eig < b.min_eig;
    });
    CHECK(std::abs(best_min->x - 0.1464) <= 0.002);
  }

  TEST_CASE("probe rotations") {
    const auto fib = probe_rotations(10, ProbeScheme::fibonacci);
    REQUIRE(fib.size() == 10);
    double closest = 10.0;
    for (std::size_t i = 0; i < fib.size(); ++i)
      for (std::size_t j = i + 1; j < fib.size(); ++j)
        closest = std::min(closest, great_circle(fib[i].direction(), fib[j].direction()));
    CHECK(closest > 0.5);

    const double x = two_design_fiducial_x();
    const double cont = uniformity_report(gram_continuous(x)).det;
    const double fdet = uniformity_report(gram_discrete(CovariantEnsemble::discrete(x, fib))).det;
    CHECK(fdet < 0.1 * cont);

    const auto h1 = probe_rotations(10, ProbeScheme::haar, 77), h2 = probe_rotations(10, ProbeScheme::haar, 77);
    for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h1[i].spinor() == h2[i].spinor());

    const auto design = probe_rotations(10, ProbeScheme::design);
    const GramMatrix gd = gram_discrete(CovariantEnsemble::discrete(x, design));
    CHECK(gd.matrix().row(0).tail(8).cwiseAbs().maxCoeff() < 1e-12);
    const double ddet = uniformity_report(gd).det;
    CHECK(ddet > 0.5 * cont);
    CHECK(ddet < 2.0 * cont);
    CHECK(probe_rotations(10, ProbeScheme::design)[3].spinor() == design[3].spinor());
    CHECK_THROWS_AS(probe_rotations(5, ProbeScheme::design), DomainError);
  }

  TEST_CASE("scheme names") {
    CHECK(parse_scheme("design") == ProbeScheme::design);
    CHECK(parse_scheme("fibonacci") == ProbeScheme::fibonacci);
    CHECK(scheme_name(ProbeScheme::haar) == "haar");
    CHECK_THROWS_AS(parse_scheme("random"), ValidationError);
  }
}
