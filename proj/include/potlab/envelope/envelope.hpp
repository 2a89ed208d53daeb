#pragma once

#include <functional>
#include <string>

#include "potlab/envelope/equilibrium.hpp"

namespace potlab {

enum class EnvelopeMode { set_envelope, measure_envelope };

struct EnvelopeField {
  PotentialField field;  // P phi = psi_mu* - C tabulated on the evaluation grid
  EnvelopeMode mode = EnvelopeMode::set_envelope;
  EquilibriumSolution solution;  // equilibrium on the set (or carrier)
  std::string carrier;           // description of the carrier (measure envelopes)
  std::size_t carrier_cells = 0;
};

/// P_S phi on S.
EnvelopeField envelope_set(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phi,
                           const EquilibriumOptions& opts = {});

/// P_{mu0} phi: the set envelope of the carrier of mu0 (cells whose mass exceeds
/// carrier_threshold times their share under the normalized cell volumes),
/// evaluated on `eval` (mu0's grid when null).
EnvelopeField envelope_measure(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                               double carrier_threshold = 1e-12, GridPtr eval = nullptr,
                               const EquilibriumOptions& opts = {});
/// Ball-union version: the carrier is the union of the balls themselves.
EnvelopeField envelope_measure(const KernelConfig& cfg, const BallUnionMeasure& mu0, const WeightFunction& phi,
                               GridPtr eval, const EquilibriumOptions& opts = {});

/// Indices of the carrier cells of a grid measure.
std::vector<std::size_t> carrier_cells(const GridMeasure& mu0, double carrier_threshold);

struct RegularityReport {
  double max_violation = 0.0;  // max over S of P_S phi - phi
  std::size_t worst_cell = 0;
  bool regular = false;
  EnvelopeField envelope;
};

RegularityReport regularity_check(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phi, double tol,
                                  const EquilibriumOptions& opts = {});

/// A potential together with the measure it is the potential of.
struct PotentialPair {
  PotentialField psi;
  GridMeasure mu;
};

PotentialPair as_pair(const EnvelopeField& env);

/// 1/2 sum_i (psi - psi0)_i (mu + mu0)_i.
double primitive_energy(const PotentialPair& psi, const PotentialPair& psi0);

struct LegendreReport {
  double direct = 0.0;     // inf E_{phi+u} - inf E_phi by minimization
  double primitive = 0.0;  // primitive energy of P(phi+u) relative to P(phi)
  double gap = 0.0;
};

LegendreReport legendre_gap(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phi,
                            const PotentialField& u, const EquilibriumOptions& opts = {});

struct ApproximationStep {
  double beta = 0.0;
  GridMeasure measure;
  double energy = 0.0;
};

struct ApproximationSequence {
  std::vector<ApproximationStep> steps;
  double target_energy = 0.0;  // E(mu)
  /// Energies settled within settle_tol over the last two steps.
  bool settled = false;
};

/// Minimizers of E_{psi_mu} + D(. | mu0)/beta along the schedule; they converge
/// in energy to mu when mu0 is determining.
ApproximationSequence energy_approximation_sequence(const KernelConfig& cfg, const GridMeasure& mu,
                                                    const GridMeasure& mu0, const std::vector<double>& beta_schedule,
                                                    double settle_tol = 1e-3);

}  // namespace potlab
