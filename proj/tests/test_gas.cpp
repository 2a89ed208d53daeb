#include <cmath>

#include "doctest.h"

#include "potlab/core/errors.hpp"
#include "potlab/gas/gas.hpp"

using namespace potlab;

TEST_SUITE("gas") {
  TEST_CASE("hamiltonian normalisation") {
    const auto W = PairInteraction::riesz(KernelConfig::logarithmic());
    const WeightFunction phi = [](const Point& p) { return p[0] * p[0]; };
    const std::vector<Point> x{Point{-1.0}, Point{1.0}};
    CHECK(hamiltonian(W, x, phi) == doctest::Approx(-2.0 * std::log(2.0) + 2.0));
    const auto V = PairInteraction::separable([](const Point& p) { return p[0]; });
    const std::vector<Point> y{Point{0.1}, Point{0.2}, Point{0.4}};
    // (1/(N-1)) sum_{i<j} (V_i + V_j) = sum_i V_i
    CHECK(hamiltonian(V, y, nullptr) == doctest::Approx(0.7));
    CHECK_THROWS_AS(W(Point{0.3}, Point{0.3}), CoincidentPoints);
  }

  TEST_CASE("Fekete pair on [-1,1]") {
    const auto W = PairInteraction::riesz(KernelConfig::logarithmic());
    const auto f = fekete_points(W, share(GridSet::interval(-1.0, 1.0, 1e-3)), nullptr, 2, 2, 1);
    CHECK(f.F == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    CHECK(std::abs(f.config.positions[0][0]) == doctest::Approx(1.0));
  }

  TEST_CASE("sampling is bit-reproducible from the seed") {
    const auto g = share(GridSet::interval(-1.0, 1.0, 0.05));
    const ReferenceMeasure mu0(GridMeasure::lebesgue(g));
    const auto W = PairInteraction::riesz(KernelConfig::logarithmic());
    GasConfig c;
    c.N = 4;
    c.beta_N = 2.0;
    c.sweeps = 500;
    c.chains = 2;
    c.thin = 50;
    c.seed = 42;
    const auto a = sample_gibbs(W, mu0, nullptr, c);
    const auto b = sample_gibbs(W, mu0, nullptr, c);
    CHECK(a.mean_H == b.mean_H);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
      for (int k = 0; k < c.N; ++k) CHECK(a.samples[i].config.positions[k] == b.samples[i].config.positions[k]);
    c.seed = 43;
    CHECK(sample_gibbs(W, mu0, nullptr, c).mean_H != a.mean_H);
  }

  TEST_CASE("reference samples stay on the support") {
    std::mt19937_64 rng(9);
    BallUnionMeasure balls({{Point{0.0}, 0.1, 0.0, 0.0}, {Point{0.5}, 0.05, 0.0, 0.0}}, true);
    const ReferenceMeasure mu0(balls);
    for (int i = 0; i < 1000; ++i) {
      const Point x = mu0.sample(rng);
      CHECK((std::abs(x[0]) <= 0.1 || std::abs(x[0] - 0.5) <= 0.05));
      CHECK(mu0.density(x) > 0.0);
    }
    CHECK(mu0.density(Point{0.3}) == 0.0);
  }

  TEST_CASE("thermodynamic integration at beta = 0 is exact") {
    const auto g = share(GridSet::interval(0.0, 1.0, 0.05));
    const auto V = PairInteraction::separable([](const Point& p) { return p[0] == 0.0 ? -1.0 : 0.0; });
    GasConfig c;
    c.N = 4;
    c.sweeps = 200;
    const auto rows = free_energy_ti(V, ReferenceMeasure(GridMeasure::lebesgue(g)), nullptr, c, {0.0, 0.5, 1.0});
    CHECK(rows.front().logZ == 0.0);
    CHECK(rows.back().logZ == 0.0);
    CHECK_THROWS_AS(free_energy_ti(V, ReferenceMeasure(GridMeasure::lebesgue(g)), nullptr, c, {0.5, 1.0}), InvalidInput);
  }

  TEST_CASE("invalid gas configs") {
    const auto g = share(GridSet::interval(0.0, 1.0, 0.1));
    const ReferenceMeasure mu0(GridMeasure::lebesgue(g));
    const auto W = PairInteraction::riesz(KernelConfig::logarithmic());
    GasConfig c;
    c.N = 1;
    CHECK_THROWS_AS(sample_gibbs(W, mu0, nullptr, c), InvalidInput);
    c.N = 2;
    c.proposal_scale = 0.0;
    CHECK_THROWS_AS(sample_gibbs(W, mu0, nullptr, c), InvalidInput);
  }
}
