#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "potlab/core/cell_integrals.hpp"
#include "potlab/core/errors.hpp"
#include "potlab/core/functionals.hpp"
#include "potlab/core/io.hpp"
#include "potlab/core/quadrature.hpp"

using namespace potlab;

namespace {

GridMeasure random_measure(const GridPtr& g, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(g->size());
  for (double& x : w) x = e(rng);
  return GridMeasure(g, w).normalized();
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("kernel values and validation") {
    const auto L = KernelConfig::logarithmic();
    CHECK(L.log_case());
    CHECK(kernel_eval(L, Point{-1.0}, Point{1.0}) == doctest::Approx(-2.0 * std::log(2.0)));
    CHECK_THROWS_AS(kernel_eval(L, Point{0.5}, Point{0.5}), CoincidentPoints);
    const KernelConfig N3(3, 2.0);
    CHECK(kernel_eval(N3, Point{0, 0, 0}, Point{0, 0, 2}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(KernelConfig(1, 2.0), Unsupported);
    CHECK_THROWS_AS(KernelConfig(2, 2.5), Unsupported);
    CHECK_NOTHROW(KernelConfig(1, 0.5));
  }

  TEST_CASE("gauss rules integrate polynomials") {
    const auto& r = gauss_legendre(10);
    double s = 0.0;
    for (int i = 0; i < 10; ++i) s += r.weights[i] * std::pow(r.nodes[i], 18);
    CHECK(s == doctest::Approx(2.0 / 19));
    const auto c = gauss_chebyshev(8);
    double m2 = 0.0;
    for (int i = 0; i < 8; ++i) m2 += c.weights[i] * c.nodes[i] * c.nodes[i];
    CHECK(m2 == doctest::Approx(0.5));
  }

  TEST_CASE("self energies of cells against closed forms") {
    const auto L = KernelConfig::logarithmic();
    // mean of -2 log|x-y| for x, y uniform on a segment of length l is 3 - 2 log l
    for (double l : {1e-3, 0.1, 2.0}) {
      Cell seg{Point{0.0}, CellShape::cube, l, {}};
      CHECK(cell_self_mean(L, seg) == doctest::Approx(3.0 - 2.0 * std::log(l)).epsilon(1e-10));
    }
    // uniform disk of radius R: mean log|x-y| = log R - 1/4
    Cell disk{Point{0.0, 0.0}, CellShape::ball, 0.3, {}};
    CHECK(cell_self_mean(L, disk) == doctest::Approx(-2.0 * std::log(0.3) + 0.5).epsilon(1e-8));
    // Newtonian ball in R^3: mean 1/|x-y| = 6 / (5R)
    const KernelConfig N3(3, 2.0);
    Cell ball{Point{0, 0, 0}, CellShape::ball, 0.2, {}};
    CHECK(cell_self_mean(N3, ball) == doctest::Approx(6.0 / (5.0 * 0.2)).epsilon(1e-8));
    // outside a ball its potential is that of a point charge
    CHECK(cell_point_mean(N3, ball, Point{0.0, 0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-10));
    Cell pt{Point{0.0}, CellShape::point, 0.0, {}};
    CHECK(std::isinf(cell_self_mean(L, pt)));
  }

  TEST_CASE("lattices") {
    const auto g = GridSet::interval(-1.0, 1.0, 1e-3);
    CHECK(g.size() == 2000);
    CHECK(g.total_volume() == doctest::Approx(2.0));
    CHECK(g.locate(Point{0.25}).has_value());
    CHECK_FALSE(g.locate(Point{1.5}).has_value());
    const auto d = GridSet::disk(1.0, 0.02);
    CHECK(d.total_volume() == doctest::Approx(std::numbers::pi).epsilon(0.01));
    const auto c = GridSet::circle(Point{0.0, 0.0}, 1.0, 100);
    CHECK(c.total_volume() == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-3));
  }

  TEST_CASE("arcsine energy on a fine interval grid") {
    const auto L = KernelConfig::logarithmic();
    const auto g = share(GridSet::interval(-1.0, 1.0, 2e-3));
    const auto F = [](double x) { return std::asin(std::clamp(x, -1.0, 1.0)) / std::numbers::pi; };
    const auto mu = GridMeasure::from_masses(g, [&](const Cell& c) { return F(c.center[0] + c.size / 2) - F(c.center[0] - c.size / 2); });
    CHECK(energy(L, mu) == doctest::Approx(std::log(2.0)).epsilon(5e-3));
  }

  TEST_CASE("positive definiteness of the mutual energy") {
    std::mt19937_64 rng(11);
    const auto L = KernelConfig::logarithmic();
    const KernelConfig R(1, 0.5);
    const auto I = share(GridSet::interval(-1.0, 1.0, 0.05));
    const auto D = share(GridSet::disk(1.0, 0.2));
    for (int t = 0; t < 100; ++t) {
      const GridPtr& g = t % 2 ? I : D;
      const KernelConfig& k = (t % 4 == 1) ? R : L;
      const auto a = random_measure(g, rng), b = random_measure(g, rng);
      CHECK(energy_distance_sq(k, a, b) >= 0.0);
    }
  }

  TEST_CASE("relative entropy") {
    std::mt19937_64 rng(3);
    const auto g = share(GridSet::interval(0.0, 1.0, 0.05));
    const auto mu0 = GridMeasure::lebesgue(g);
    for (int t = 0; t < 20; ++t) CHECK(relative_entropy(random_measure(g, rng), mu0) >= 0.0);
    CHECK(relative_entropy(mu0, mu0) == doctest::Approx(0.0));
    CHECK(std::isinf(relative_entropy(mu0, GridMeasure::dirac(g, 3))));
  }

  TEST_CASE("measure csv round trip is value identical") {
    std::mt19937_64 rng(5);
    for (const GridPtr& g : {share(GridSet::interval(-1.0, 1.0, 0.01)), share(GridSet::disk(1.0, 0.1))}) {
      const auto mu = random_measure(g, rng);
      const auto back = parse_measure_csv(measure_csv(mu), g);
      CHECK(back.weights() == mu.weights());
    }
  }

  TEST_CASE("ball union json round trip") {
    BallUnionMeasure mu({{Point{0.0}, 0.1, 0.0, -1.0}, {Point{0.5}, 1e-30, 0.0, -900.0}}, true);
    const auto back = ball_union_from_json(ball_union_to_json(mu));
    REQUIRE(back.components().size() == 2);
    CHECK(back.components()[1].log_weight == mu.components()[1].log_weight);
    CHECK(back.components()[1].radius == mu.components()[1].radius);
    CHECK(back.total_mass() == doctest::Approx(1.0));
  }

  TEST_CASE("numbers keep 17 significant digits") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_number(std::numbers::pi)) == std::numbers::pi);
    CHECK(format_number(-INFINITY) == "-inf");
  }
}
