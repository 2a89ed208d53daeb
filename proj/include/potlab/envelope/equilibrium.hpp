#pragma once

#include <cstddef>
#include <vector>

#include "potlab/core/functionals.hpp"

namespace potlab {

struct EquilibriumOptions {
  /// Stationarity tolerance on the gradient -psi + phi.
  double tol = 1e-6;
  /// Cap on mirror-descent iterations.
  int max_iter = 20000;
  /// Support cut relative to the uniform weight.
  double atom_threshold = 1e-8;
  DiagonalRule diag{};
  /// Optional warm start (weights on S; zero entries stay admissible).
  std::vector<double> init;
  /// Refine the support by solving the Euler-Lagrange system on it.
  bool polish = true;
};

struct EquilibriumSolution {
  GridMeasure measure;
  PotentialField potential;  // psi of the minimizer on S
  double frostman_constant = 0.0;
  double energy_value = 0.0;  // E_phi(measure)
  int iterations = 0;
  double residual = 0.0;
};

/// Minimizer of E_phi over probability measures on the cells of S. Point cells
/// carry no mass; cells with phi = +inf are excluded.
EquilibriumSolution equilibrium_measure(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phi,
                                        const EquilibriumOptions& opts = {});

/// Median of values with respect to nonnegative weights.
double weighted_median(const std::vector<double>& values, const std::vector<double>& weights);

struct FrostmanReport {
  double constant = 0.0;         // weighted median of psi - phi on the support
  double max_upper = 0.0;        // max over S of psi - phi - C
  double max_support_dev = 0.0;  // max over support of |psi - phi - C|
  std::size_t worst_cell = 0;
  bool verdict = false;
};

FrostmanReport frostman_check(const EquilibriumSolution& sol, const PotentialField& phi, double tol,
                              double atom_threshold = 1e-8);
/// The same test for an arbitrary measure on the grid of phi.
FrostmanReport frostman_check(const KernelConfig& cfg, const GridMeasure& mu, const PotentialField& phi, double tol,
                              const DiagonalRule& diag = {}, double atom_threshold = 1e-8);

}  // namespace potlab
