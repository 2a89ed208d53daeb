#include <cmath>
#include <numbers>

#include "doctest.h"

#include "potlab/core/errors.hpp"
#include "potlab/envelope/envelope.hpp"

using namespace potlab;

namespace {

EquilibriumOptions tight() {
  EquilibriumOptions o;
  o.tol = 1e-9;
  return o;
}

}  // namespace

TEST_SUITE("envelope") {
  TEST_CASE("equilibrium of [-1,1] is the arcsine law") {
    const auto L = KernelConfig::logarithmic();
    const auto S = share(GridSet::interval(-1.0, 1.0, 0.01));
    const auto phi = PotentialField::constant(S, 0.0);
    const auto sol = equilibrium_measure(L, S, phi);
    CHECK(sol.energy_value == doctest::Approx(std::log(2.0)).epsilon(0.01));
    CHECK(sol.measure.is_probability(1e-10));
    CHECK(frostman_check(sol, phi, 5e-3).verdict);
    // Frostman constant of the arcsine law is -2 log 2
    CHECK(sol.frostman_constant == doctest::Approx(-2.0 * std::log(2.0)).epsilon(0.01));
  }

  TEST_CASE("quadratic weight gives a semicircle on [-sqrt2, sqrt2]") {
    const auto L = KernelConfig::logarithmic();
    const auto S = share(GridSet::interval(-2.0, 2.0, 0.01));
    const auto phi = PotentialField::tabulate(S, [](const Point& p) { return p[0] * p[0]; });
    const auto sol = equilibrium_measure(L, S, phi);
    double lo = 9, hi = -9;
    for (std::size_t i : sol.measure.support(1e-8 / S->size())) {
      lo = std::min(lo, S->cell(i).center[0]);
      hi = std::max(hi, S->cell(i).center[0]);
    }
    CHECK(lo == doctest::Approx(-std::sqrt(2.0)).epsilon(0.03));
    CHECK(hi == doctest::Approx(std::sqrt(2.0)).epsilon(0.03));
  }

  TEST_CASE("invalid inputs") {
    const auto L = KernelConfig::logarithmic();
    const auto S = share(GridSet::interval(-1.0, 1.0, 0.1));
    const auto T = share(GridSet::interval(-1.0, 1.0, 0.05));
    CHECK_THROWS_AS(equilibrium_measure(L, S, PotentialField::constant(T, 0.0)), GridMismatch);
    CHECK_THROWS_AS(equilibrium_measure(L, S, PotentialField::constant(S, NAN)), InvalidInput);
    const KernelConfig R3(3, 2.5);
    const auto B = share(GridSet::box(Point{0, 0, 0}, Point{1, 1, 1}, 0.5));
    CHECK_THROWS_AS(envelope_set(R3, B, PotentialField::constant(B, 0.0)), Unsupported);
  }

  TEST_CASE("set envelope is idempotent, monotone and concave") {
    const auto L = KernelConfig::logarithmic();
    const auto S = share(GridSet::interval(-1.0, 1.0, 0.02));
    const auto phi1 = PotentialField::tabulate(S, [](const Point& p) { return p[0] * p[0]; });
    const auto phi2 = PotentialField::tabulate(S, [](const Point& p) { return std::abs(p[0] - 0.3) + 0.5 * p[0]; });
    const auto P1 = envelope_set(L, S, phi1, tight()).field;
    const auto P2 = envelope_set(L, S, phi2, tight()).field;
    const auto PP1 = envelope_set(L, S, P1, tight()).field;
    // max(phi1, phi2) dominates both
    std::vector<double> mx(S->size()), mid(S->size());
    for (std::size_t i = 0; i < S->size(); ++i) {
      mx[i] = std::max(phi1[i], phi2[i]);
      mid[i] = 0.5 * (phi1[i] + phi2[i]);
    }
    const auto Pmax = envelope_set(L, S, PotentialField(S, mx), tight()).field;
    const auto Pmid = envelope_set(L, S, PotentialField(S, mid), tight()).field;
    const double tol = 1e-5;
    for (std::size_t i = 0; i < S->size(); ++i) {
      CHECK(PP1[i] == doctest::Approx(P1[i]).epsilon(tol).scale(1.0));
      CHECK(P1[i] <= Pmax[i] + tol);
      CHECK(P2[i] <= Pmax[i] + tol);
      CHECK(Pmid[i] >= 0.5 * (P1[i] + P2[i]) - tol);
      CHECK(P1[i] <= phi1[i] + tol);
    }
  }

  TEST_CASE("regular compact set passes the regularity check") {
    const auto L = KernelConfig::logarithmic();
    const auto S = share(GridSet::interval(0.0, 1.0, 0.01));
    const auto rep = regularity_check(L, S, PotentialField::constant(S, 0.0), 5e-3);
    CHECK(rep.regular);
  }

  TEST_CASE("measure envelope matches the set envelope for Lebesgue") {
    const auto L = KernelConfig::logarithmic();
    const auto S = share(GridSet::interval(-1.0, 1.0, 0.02));
    const WeightFunction w = [](const Point& p) { return 0.5 * p[0]; };
    const auto a = envelope_set(L, S, PotentialField::tabulate(S, w)).field;
    const auto b = envelope_measure(L, GridMeasure::lebesgue(S), w).field;
    for (std::size_t i = 0; i < S->size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-6).scale(1.0));
  }

  TEST_CASE("Legendre duality between energy and envelope") {
    const auto L = KernelConfig::logarithmic();
    const auto S = share(GridSet::interval(-1.0, 1.0, 0.02));
    const auto phi = PotentialField::constant(S, 0.0);
    const auto u = PotentialField::tabulate(S, [](const Point& p) { return 0.3 * p[0]; });
    const auto rep = legendre_gap(L, S, phi, u, tight());
    CHECK(std::abs(rep.gap) < 1e-3);
  }

  TEST_CASE("energy approximation from a determining reference") {
    const auto L = KernelConfig::logarithmic();
    const auto S = share(GridSet::interval(-1.0, 1.0, 0.02));
    const auto mu0 = GridMeasure::lebesgue(S);
    const auto mu = equilibrium_measure(L, S, PotentialField::tabulate(S, [](const Point& p) { return p[0] * p[0]; })).measure;
    const auto seq = energy_approximation_sequence(L, mu, mu0, {10.0, 100.0, 1000.0, 10000.0});
    CHECK(std::abs(seq.steps.back().energy - seq.target_energy) < 0.01);
  }
}
