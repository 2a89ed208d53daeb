#pragma once

#include <functional>
#include <limits>

#include "potlab/core/interaction.hpp"
#include "potlab/core/measure.hpp"

namespace potlab {

/// A weight phi given as a function on R^d.
using WeightFunction = std::function<double(const Point&)>;

inline constexpr double kInfBeta = std::numeric_limits<double>::infinity();

/// psi_mu = -Wbar mu on the measure's own grid (cell-averaged potential).
PotentialField potential(const KernelConfig& cfg, const GridMeasure& mu, const DiagonalRule& diag = {});

/// psi_mu at the centres of another grid's cells. Cells of mu's grid that also
/// belong to `target` are handled with the pair means of `target`.
PotentialField potential_on(const KernelConfig& cfg, const GridMeasure& mu, const GridPtr& target,
                            const DiagonalRule& diag = {});

/// psi_mu(x) = -sum_i w_i Wbar(x, cell_i): the diagonal value when x lies in
/// cell_i, closed-form ball potentials for ball cells, the kernel otherwise.
double potential_eval(const KernelConfig& cfg, const GridMeasure& mu, const Point& x, const DiagonalRule& diag = {});
double potential_eval(const KernelConfig& cfg, const BallUnionMeasure& mu, const Point& x,
                      const DiagonalRule& diag = {});

/// E(mu) = 1/2 sum_ij w_i w_j Wbar_ij.
double energy(const KernelConfig& cfg, const GridMeasure& mu, const DiagonalRule& diag = {});
double energy(const KernelConfig& cfg, const BallUnionMeasure& mu, const DiagonalRule& diag = {});

/// E_phi(mu) = E(mu) + sum_i w_i phi_i; +inf when mu charges a cell with phi = +inf.
double weighted_energy(const KernelConfig& cfg, const GridMeasure& mu, const PotentialField& phi,
                       const DiagonalRule& diag = {});

/// sum_i mu_i log(mu_i / mu0_i); +inf off absolute continuity.
double relative_entropy(const GridMeasure& mu, const GridMeasure& mu0);

/// E_phi(mu) + D(mu | mu0) / beta; beta = kInfBeta drops the entropy.
double free_energy_functional(const KernelConfig& cfg, const GridMeasure& mu, const GridMeasure& mu0,
                              const PotentialField& phi, double beta, const DiagonalRule& diag = {});

/// 1/2 sum (a-b)_i (a-b)_j Wbar_ij for measures on a common grid.
double energy_distance_sq(const KernelConfig& cfg, const GridMeasure& a, const GridMeasure& b,
                          const DiagonalRule& diag = {});

}  // namespace potlab
