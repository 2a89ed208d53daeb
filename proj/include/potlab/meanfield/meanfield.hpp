#pragma once

#include <functional>
#include <vector>

#include "potlab/core/functionals.hpp"
#include "potlab/envelope/equilibrium.hpp"

namespace potlab {

struct MeanFieldOptions {
  enum class Method { newton, damped };
  Method method = Method::newton;
  /// Fixed-point residual target.
  double tol = 1e-8;
  /// Newton iterations (or damped sweeps) per inverse temperature.
  int max_iter = 200;
  int max_sweeps = 10000;
  double damping = 0.5;
  /// Largest beta solved from a cold start; above it beta is reached by doubling.
  double anneal_threshold = 1.0;
  DiagonalRule diag{};
  /// Optional warm start on mu0's grid, assumed to be the solution at init_beta.
  std::vector<double> init;
  double init_beta = 0.0;
  /// Used for the T = 0 columns.
  EquilibriumOptions equilibrium{};
};

struct MeanFieldSolution {
  GridMeasure measure;
  PotentialField psi;
  double beta = 0.0;
  double free_energy = 0.0;
  double fixed_point_residual = 0.0;
  std::vector<double> anneal_path;
  int iterations = 0;
};

/// Minimizer of F_{phi,beta} = E_phi + D(. | mu0)/beta over measures on mu0's
/// carrier (phi on mu0's grid).
MeanFieldSolution solve_meanfield(const KernelConfig& cfg, const GridMeasure& mu0, const PotentialField& phi,
                                  double beta, const MeanFieldOptions& opts = {});

struct FreeEnergyPoint {
  double T = 0.0;
  double f = 0.0;
  bool converged = false;
};

struct FreeEnergyCurve {
  std::vector<FreeEnergyPoint> points;  // ascending in T, the T = 0 anchor first
  double inf_energy = 0.0;              // inf E_phi over S0
  double gap_at_zero = 0.0;             // f(T_min) - inf E_phi
};

/// f(T) on the given temperatures, with the zero-temperature anchor computed as
/// the equilibrium energy of (S0, phi).
FreeEnergyCurve free_energy_scan(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                                 std::vector<double> T_grid, const GridPtr& S0, const MeanFieldOptions& opts = {});

struct ZeroTemperatureGap {
  double gap = 0.0;           // extrapolated f(0+) - inf E_phi
  double raw_gap = 0.0;       // f(1/beta_max) - inf E_phi
  double inf_energy = 0.0;
  std::vector<double> betas;  // top three anneal steps
  std::vector<double> f;
};

ZeroTemperatureGap zero_temperature_gap(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                                        double beta_max, const GridPtr& S0, const MeanFieldOptions& opts = {});

struct PhaseRow {
  double h = 0.0;
  double f = 0.0;
  double dfdh = 0.0;        // <phi, mu_h>
  double central = 0.0;     // central difference of f (NaN at the ends)
  bool converged = false;
};

/// f(T, h) for phi_h = phi0 + h phi. T = 0 uses equilibrium measures on the carrier of mu0.
std::vector<PhaseRow> phase_scan(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi0,
                                 const WeightFunction& phi, const std::vector<double>& h_grid, double T,
                                 const MeanFieldOptions& opts = {});

struct WeightedCounterexample {
  double t = 0.0;
  double constrained = 0.0;  // inf E_phi over measures absolutely continuous wrt mu0
  double witness = 0.0;      // E_phi(uniform measure on the unit circle)
  double overlay_inf = 0.0;  // inf E_phi over the lattice together with the circle
  double gap = 0.0;          // constrained - overlay_inf
};

/// phi = phi0 - t on the unit circle, phi0 elsewhere; mu0 the normalized Lebesgue
/// measure of K (a lattice containing the circle).
WeightedCounterexample counterexample_weighted(const KernelConfig& cfg, const GridPtr& K, const WeightFunction& phi0,
                                               double t, int circle_cells = 400,
                                               const EquilibriumOptions& opts = {});

}  // namespace potlab
