#include <cmath>

#include "doctest.h"

#include "potlab/core/errors.hpp"
#include "potlab/diagnostics/diagnostics.hpp"

using namespace potlab;

TEST_SUITE("diagnostics") {
  TEST_CASE("capacity of intervals and disks") {
    const auto L = KernelConfig::logarithmic();
    // C([a,b]) = 1 / log(4/(b-a))
    CHECK(capacity(L, share(GridSet::interval(0.0, 1.0, 1e-3))).value == doctest::Approx(1.0 / std::log(4.0)).epsilon(0.01));
    CHECK(capacity(L, capacity_ball_grid(L, Point{0.0, 0.0}, 0.1, 0.005)).value ==
          doctest::Approx(-1.0 / std::log(0.1)).epsilon(0.01));
    CHECK(ball_capacity_model(L, 0.1) == doctest::Approx(-1.0 / std::log(0.1)));
    CHECK(ball_capacity_model(KernelConfig(3, 2.0), 0.1) == doctest::Approx(0.2));
  }

  TEST_CASE("finite sets have zero capacity") {
    const auto L = KernelConfig::logarithmic();
    CHECK(capacity(L, share(GridSet::points({Point{0.0}, Point{0.5}}))).value == 0.0);
  }

  TEST_CASE("grid ball masses") {
    const auto mu = GridMeasure::lebesgue(share(GridSet::interval(-1.0, 1.0, 0.01)));
    CHECK(grid_ball_mass(mu, Point{0.0}, 0.25) == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(grid_ball_mass(mu, Point{1.0}, 0.5) == doctest::Approx(0.25).epsilon(1e-3));
    MassCheckOptions o;
    CHECK(bm_mass_check(mu, o).passed);
  }

  TEST_CASE("Ullman and determining controls for Lebesgue") {
    const auto L = KernelConfig::logarithmic();
    const auto mu0 = GridMeasure::lebesgue(share(GridSet::interval(-1.0, 1.0, 0.02)));
    const auto u = ullman_test(L, mu0, nullptr);
    CHECK(u.equal);
    DeterminingOptions o;
    o.ensemble_size = 8;
    const auto d = determining_test(L, mu0, nullptr, o);
    CHECK(d.verdict == DeterminingVerdict::no_violation_found);
    CHECK(d.gaps.size() == 8);
  }

  TEST_CASE("BM but not determining construction") {
    const auto L = KernelConfig::logarithmic();
    const double cap = capacity(L, share(GridSet::interval(-1.0, 1.0, 0.01))).value;
    BMConstructionOptions o;
    o.k_max = 6;
    o.grid_h = 0.01;
    CHECK_THROWS_AS(construct_bm_not_determining(L, Point{-1.0}, Point{1.0}, nullptr, cap * 1.01, o), InvalidInput);
    const auto c = construct_bm_not_determining(L, Point{-1.0}, Point{1.0}, nullptr, cap / 2, o);
    CHECK(c.capacity_bound < cap / 2);
    CHECK(c.measure.total_mass() == doctest::Approx(1.0));
    double lam = 0.0;
    for (const auto& r : c.table) {
      lam += r.lambda;
      CHECK(r.radius <= 0.25 / r.k);
    }
    CHECK(lam == doctest::Approx(1.0));
    const auto u = ullman_test(L, c.measure, nullptr, share(GridSet::interval(-1.0, 1.0, 0.01)));
    CHECK(u.carrier_capacity < cap / 2);
  }

  TEST_CASE("non-BM construction stays below the capacity threshold") {
    const auto c = construct_non_bm();
    CHECK(c.threshold == doctest::Approx(0.5 / std::log(4.0)));
    for (const auto& r : c.table) {
      CHECK(r.bound < c.threshold);
      CHECK(r.radius < 1.0 / r.k);
    }
    CHECK_THROWS(construct_non_bm({0.5}, 2));
  }
}
