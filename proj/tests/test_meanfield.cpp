#include <cmath>

#include "doctest.h"

#include "potlab/core/errors.hpp"
#include "potlab/meanfield/meanfield.hpp"

using namespace potlab;

TEST_SUITE("meanfield") {
  TEST_CASE("free energy of the fixed point matches the functional") {
    const auto L = KernelConfig::logarithmic();
    const auto g = share(GridSet::interval(-1.0, 1.0, 0.02));
    const auto mu0 = GridMeasure::lebesgue(g);
    const auto phi = PotentialField::tabulate(g, [](const Point& p) { return p[0]; });
    for (double beta : {0.5, 5.0, 50.0}) {
      const auto sol = solve_meanfield(L, mu0, phi, beta);
      CHECK(sol.fixed_point_residual < 1e-8);
      CHECK(sol.free_energy == doctest::Approx(free_energy_functional(L, sol.measure, mu0, phi, beta)).epsilon(1e-9));
    }
  }

  TEST_CASE("temperature limits") {
    const auto L = KernelConfig::logarithmic();
    const auto g = share(GridSet::interval(-1.0, 1.0, 0.02));
    const auto mu0 = GridMeasure::lebesgue(g);
    const auto phi = PotentialField::constant(g, 0.0);
    // hot: the reference measure itself
    CHECK(l1_distance(solve_meanfield(L, mu0, phi, 1e-4).measure, mu0) < 1e-3);
    // cold: close to the equilibrium energy
    const double inf_e = equilibrium_measure(L, g, phi).energy_value;
    const auto cold = solve_meanfield(L, mu0, phi, 1e3);
    CHECK(cold.free_energy - inf_e < 0.02);
    CHECK(cold.free_energy >= inf_e - 1e-9);
  }

  TEST_CASE("f(T) is nondecreasing and concave") {
    const auto L = KernelConfig::logarithmic();
    const auto g = share(GridSet::interval(-1.0, 1.0, 0.02));
    const auto curve = free_energy_scan(L, GridMeasure::lebesgue(g), [](const Point& p) { return p[0] * p[0]; },
                                        {0.01, 0.03, 0.1, 0.3, 1.0, 3.0}, nullptr);
    REQUIRE(curve.points.size() == 7);
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
      REQUIRE(curve.points[k].converged);
      CHECK(curve.points[k].f >= curve.points[k - 1].f - 1e-8);
    }
    for (std::size_t k = 1; k + 1 < curve.points.size(); ++k) {
      const auto &a = curve.points[k - 1], &b = curve.points[k], &c = curve.points[k + 1];
      CHECK((c.f - b.f) / (c.T - b.T) <= (b.f - a.f) / (b.T - a.T) + 1e-6);
    }
    CHECK(curve.gap_at_zero >= 0.0);
  }

  TEST_CASE("rejects bad temperatures") {
    const auto L = KernelConfig::logarithmic();
    const auto g = share(GridSet::interval(-1.0, 1.0, 0.1));
    const auto mu0 = GridMeasure::lebesgue(g);
    CHECK_THROWS_AS(solve_meanfield(L, mu0, PotentialField::constant(g, 0.0), 0.0), InvalidInput);
    CHECK_THROWS_AS(free_energy_scan(L, mu0, [](const Point&) { return 0.0; }, {-1.0}, nullptr), InvalidInput);
  }

  TEST_CASE("weighted counterexample gap") {
    const auto L = KernelConfig::logarithmic();
    const auto K = share(GridSet::disk(1.5, 0.1));
    const auto w = counterexample_weighted(L, K, [](const Point&) { return 0.0; }, 3.0, 200);
    CHECK(w.gap >= 1.0);
    CHECK(w.overlay_inf <= w.witness + 1e-9);
  }
}
