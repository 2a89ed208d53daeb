#include <cmath>
#include <numbers>

#include "doctest.h"

#include "potlab/core/errors.hpp"
#include "potlab/diagnostics/diagnostics.hpp"
#include "potlab/orthopoly/orthopoly.hpp"

using namespace potlab;

namespace {

/// log of sum over node tuples of prod w_i |Vandermonde|^2 (direct N-fold sum).
double brute_log_partition(const SpectralMeasure& m, int N) {
  const std::size_t M = m.nodes.size();
  std::vector<std::size_t> idx(N, 0);
  double Z = 0.0;
  for (;;) {
    double term = 1.0;
    for (int i = 0; i < N; ++i) term *= m.weights[idx[i]];
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) term *= std::norm(m.nodes[idx[i]] - m.nodes[idx[j]]);
    Z += term;
    int k = 0;
    while (k < N && ++idx[k] == M) idx[k++] = 0;
    if (k == N) break;
  }
  return std::log(Z);
}

std::shared_ptr<const SpectralMeasure> leb(int n) {
  return std::make_shared<SpectralMeasure>(SpectralMeasure::lebesgue(-1.0, 1.0, n));
}

}  // namespace

TEST_SUITE("orthopoly") {
  TEST_CASE("Chebyshev leading coefficients") {
    const auto B = build_basis(std::make_shared<SpectralMeasure>(SpectralMeasure::arcsine(-1.0, 1.0, 100)), 10);
    // orthonormal Chebyshev: p_0 = 1, p_k = sqrt2 T_k, T_k has leading coefficient 2^{k-1}
    CHECK(B.kappa()[0] == doctest::Approx(1.0));
    for (int k = 1; k <= 10; ++k) CHECK(B.kappa()[k] == doctest::Approx(std::sqrt(2.0) * std::pow(2.0, k - 1)).epsilon(1e-12));
  }

  TEST_CASE("Legendre recurrence coefficients") {
    const auto B = build_basis(leb(80), 40);
    const auto a = B.recurrence_a(), b = B.recurrence_b();
    for (int k = 1; k <= 40; ++k) {
      CHECK(std::abs(a[k - 1]) < 1e-12);
      CHECK(b[k - 1] == doctest::Approx(k / std::sqrt(4.0 * k * k - 1.0)).epsilon(1e-12));
    }
    CHECK(B.gram_error() < 1e-12);
  }

  TEST_CASE("orthonormality on the plane") {
    const auto g = share(GridSet::disk(1.0, 0.1));
    const auto B = build_basis(GridMeasure::lebesgue(g), 12, 6);
    CHECK_FALSE(B.real_support());
    CHECK(B.gram_error() < 1e-10);
    // z^k is orthogonal for rotation invariant measures; kappa_k = 1/||z^k||
    // and ||z^k||^2 = 1/(k+1) for the uniform unit disk, up to the lattice edge
    CHECK(B.kappa()[3] == doctest::Approx(2.0).epsilon(0.05));
    CHECK_THROWS_AS(B.recurrence_a(), Unsupported);
  }

  TEST_CASE("reproducing property of the Christoffel-Darboux kernel") {
    const auto B = build_basis(leb(30), 8);
    const auto P = B.nodal_values(8);
    const auto& m = *B.measure;
    for (cplx z : {cplx(0.3), cplx(-0.77), cplx(1.4)}) {
      const auto pz = B.evaluate(z, 8);
      for (int j = 0; j <= 8; ++j) {
        // int K_8(z, w) p_j(w) dmu(w) = p_j(z)
        cplx s = 0.0;
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
          cplx K = 0.0;
          for (int l = 0; l <= 8; ++l) K += pz[l] * std::conj(P(i, l));
          s += m.weights[i] * K * P(i, j);
        }
        CHECK(std::abs(s - pz[j]) < 1e-10 * std::max(1.0, std::abs(pz[j])));
      }
    }
  }

  TEST_CASE("Andreief identity against direct summation") {
    const auto m = leb(9);
    const auto B = build_basis(m, 4);
    for (int N : {2, 3}) CHECK(determinantal_log_partition(B, N) == doctest::Approx(brute_log_partition(*m, N)).epsilon(1e-10));
    // complex support: small disk lattice, N = 2
    const auto g = share(GridSet::disk(1.0, 0.4));
    const auto D = build_basis(GridMeasure::lebesgue(g), 3, 2);
    CHECK(determinantal_log_partition(D, 2) == doctest::Approx(brute_log_partition(*D.measure, 2)).epsilon(1e-10));
  }

  TEST_CASE("determinantal free energy rises toward log 2") {
    const auto B = build_basis(leb(120), 60);
    double prev = -INFINITY;
    for (int N : {2, 5, 10, 20, 40, 60}) {
      const double F = determinantal_free_energy(B, N);
      CHECK(F > prev);
      CHECK(F < std::log(2.0));
      prev = F;
    }
  }

  TEST_CASE("Christoffel density has mass one and tracks the arcsine law") {
    const auto g = share(GridSet::interval(-1.0, 1.0, 0.02));
    const auto B = build_basis(GridMeasure::lebesgue(g), 50);
    const auto d = christoffel_density(B, 50);
    CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    double l1 = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double a = g->cell(i).center[0] - 0.01, b = a + 0.02;
      l1 += std::abs(d.weight(i) - (std::asin(std::min(b, 1.0)) - std::asin(std::max(a, -1.0))) / std::numbers::pi);
    }
    CHECK(l1 < 0.08);
  }

  TEST_CASE("finite support stops the basis") {
    const auto pts = share(GridSet::points({Point{-0.5}, Point{0.0}, Point{0.7}}));
    const auto mu = GridMeasure(pts, {0.2, 0.3, 0.5});
    const auto B = build_basis(mu, 6, 1);
    CHECK(B.degree == 2);
    REQUIRE(B.numeric_loss.has_value());
    CHECK(*B.numeric_loss == 3);
    CHECK_THROWS_AS(determinantal_log_partition(B, 5), NumericLoss);
  }

  TEST_CASE("regularity verdicts") {
    const auto g = share(GridSet::interval(-1.0, 1.0, 0.05));
    CHECK(regularity_rate(build_basis(GridMeasure::lebesgue(g), 40), std::log(2.0)).verdict == Regularity::regular);
    CHECK(regularity_rate(build_basis(GridMeasure::lebesgue(g), 10), std::log(2.0)).verdict == Regularity::inconclusive);
    const auto nb = construct_non_bm();
    CHECK(regularity_rate(build_basis(nb.measure, 40), interval_robin(0.0, 1.0)).verdict == Regularity::irregular);
  }
}
