#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "potlab/envelope/envelope.hpp"

namespace potlab {

struct CapacityReport {
  std::string set;
  double inf_energy = 0.0;
  /// 1 / inf E_phi; 0 for sets of infinite energy, +inf when inf E_phi <= 0.
  double value = 0.0;
  double residual = 0.0;
};

/// Weighted capacity of the cells of K (phi = 0 when null).
CapacityReport capacity(const KernelConfig& cfg, const GridPtr& K, const WeightFunction& phi = nullptr,
                        const EquilibriumOptions& opts = {});
/// Capacity of the union of the balls of mu, each ball taken as a single cell
/// with its closed-form self-energy.
CapacityReport capacity(const KernelConfig& cfg, const BallUnionMeasure& mu, const WeightFunction& phi = nullptr,
                        const EquilibriumOptions& opts = {});

/// Closed ball B_r(c). Newtonian balls in R^3 are discretized by their
/// boundary sphere (n patches), which carries the equilibrium measure; other
/// cases use a lattice of edge h.
GridPtr capacity_ball_grid(const KernelConfig& cfg, const Point& c, double r, double h, int sphere_patches = 400);

/// Capacity model of a small ball used when sizing constructions:
/// -1/log r in the log case, 2r for the Newtonian kernel in R^3.
double ball_capacity_model(const KernelConfig& cfg, double r);

struct UllmanReport {
  double carrier_capacity = 0.0;
  double support_capacity = 0.0;
  double ratio = 0.0;
  /// Capacities agree within 2%.
  bool equal = false;
};

UllmanReport ullman_test(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                         double carrier_threshold = 1e-12, const EquilibriumOptions& opts = {});
/// K discretizes the support of mu0.
UllmanReport ullman_test(const KernelConfig& cfg, const BallUnionMeasure& mu0, const WeightFunction& phi,
                         const GridPtr& K, const EquilibriumOptions& opts = {});

enum class DeterminingVerdict { no_violation_found, violated };
std::string to_string(DeterminingVerdict v);

struct DeterminingOptions {
  int ensemble_size = 50;
  std::uint64_t seed = 1;
  double tol = 4e-3;
  /// Largest number of cells carrying a random test measure.
  std::size_t max_test_cells = 300;
  double carrier_threshold = 1e-12;
  EquilibriumOptions equilibrium{};
};

struct DeterminingReport {
  int ensemble_size = 0;
  std::uint64_t seed = 0;
  /// max over test measures nu of sup_S(psi_nu - phi) - esssup_mu0(psi_nu - phi).
  double max_gap = 0.0;
  /// sup over S of P_mu0 phi - P_S phi.
  double envelope_gap = 0.0;
  std::vector<double> gaps;
  DeterminingVerdict verdict = DeterminingVerdict::no_violation_found;
};

/// S discretizes the support of mu0 (mu0's own grid when null).
DeterminingReport determining_test(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                                   const DeterminingOptions& opts = {}, GridPtr S = nullptr);
DeterminingReport determining_test(const KernelConfig& cfg, const BallUnionMeasure& mu0, const WeightFunction& phi,
                                   const GridPtr& S, const DeterminingOptions& opts = {});

struct MassCheckOptions {
  double r_min = 0.05;
  double r0 = 0.5;
  double a = 2.0;
  double C = 1e-2;
  int radii = 12;
  /// Net points per axis over the bounding box of the support.
  int net = 21;
  /// Explicit centres; replace the net when non-empty.
  std::vector<Point> centers;
};

struct MassCheckReport {
  bool passed = false;
  /// min over the tested (z, r) of mu0(B_r(z)) / r^a.
  double best_constant = 0.0;
  Point worst_center;
  double worst_radius = 0.0;
  std::size_t tests = 0;
};

/// mu0(B_r(z)) >= C r^a over a net of centres and log-spaced radii.
MassCheckReport bm_mass_check(const BallUnionMeasure& mu0, const MassCheckOptions& opts);
MassCheckReport bm_mass_check(const GridMeasure& mu0, const MassCheckOptions& opts);

/// Mass of the closed ball B_r(z) under a grid measure, splitting cells that
/// meet the sphere into sub-cells.
double grid_ball_mass(const GridMeasure& mu, const Point& z, double r);

struct LevelRow {
  int k = 0;
  std::size_t points = 0;  // M_k
  double lambda = 0.0;     // normalized level weight
  double log_lambda = 0.0;
  double radius = 0.0;     // eps_k
  double ball_capacity = 0.0;
  /// Lemma-1 rows: M_k C(B_eps); Lemma-2 rows: k C(B_{2 eps}).
  double bound = 0.0;
};

struct Construction {
  BallUnionMeasure measure;
  std::vector<LevelRow> table;
  /// Sum of bounds for Lemma 1; largest bound for Lemma 2.
  double capacity_bound = 0.0;
  /// Capacity-type threshold the bounds are compared with.
  double threshold = 0.0;
  /// Mass of the omitted levels k > k_max, relative to the untruncated total.
  double tail_mass = 0.0;
  double support_capacity = 0.0;
};

struct BMConstructionOptions {
  int k_max = 12;
  /// Lattice edge used for C(K, phi).
  double grid_h = 1e-3;
  EquilibriumOptions equilibrium{};
};

/// Levels Lambda_k = K n (Z/k)^d without the 1/k boundary strip, weights
/// k^{-2}, each point smeared to a ball of radius eps_k with
/// sum_k M_k C(B_eps_k) < delta. K is the box [lo, hi].
Construction construct_bm_not_determining(const KernelConfig& cfg, const Point& lo, const Point& hi,
                                          const WeightFunction& phi, double delta,
                                          const BMConstructionOptions& opts = {});

/// Levels k = 2, 4, ..., k_max on [0,1] with weights exp(-eps_k^{-2}). An empty
/// schedule picks the largest dyadic eps_k with k C(B_{2 eps_k}) < C([0,1])/2.
Construction construct_non_bm(std::vector<double> eps_schedule = {}, int k_max = 64);

}  // namespace potlab
