#include "potlab/envelope/envelope.hpp"

#include <cmath>
#include <limits>

#include "potlab/core/errors.hpp"

namespace potlab {

namespace {

void require_domination(const KernelConfig& cfg) {
  if (!cfg.domination_regime()) throw Unsupported("envelopes need alpha <= 2");
}

EnvelopeField field_on(const KernelConfig& cfg, EquilibriumSolution sol, const GridPtr& eval, EnvelopeMode mode,
                       const EquilibriumOptions& opts) {
  PotentialField psi = potential_on(cfg, sol.measure, eval, opts.diag);
  PotentialField field = psi.plus(-sol.frostman_constant);
  return EnvelopeField{std::move(field), mode, std::move(sol), "", 0};
}

}  // namespace

EnvelopeField envelope_set(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phi,
                           const EquilibriumOptions& opts) {
  require_domination(cfg);
  EquilibriumSolution sol = equilibrium_measure(cfg, S, phi, opts);
  PotentialField field = sol.potential.plus(-sol.frostman_constant);
  return EnvelopeField{std::move(field), EnvelopeMode::set_envelope, std::move(sol), S->label(), S->size()};
}

std::vector<std::size_t> carrier_cells(const GridMeasure& mu0, double carrier_threshold) {
  const GridSet& g = mu0.grid();
  double vol = 0.0;
  std::size_t n_extended = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    vol += g.volume(i);
    if (g.volume(i) > 0.0) ++n_extended;
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double share = g.volume(i) > 0.0 ? g.volume(i) / vol : 1.0 / static_cast<double>(std::max<std::size_t>(n_extended, 1));
    if (mu0.weight(i) > carrier_threshold * share * mu0.total_mass()) idx.push_back(i);
  }
  if (idx.empty()) throw EmptyCarrier();
  return idx;
}

EnvelopeField envelope_measure(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                               double carrier_threshold, GridPtr eval, const EquilibriumOptions& opts) {
  require_domination(cfg);
  const std::vector<std::size_t> idx = carrier_cells(mu0, carrier_threshold);
  GridPtr carrier = idx.size() == mu0.size() ? mu0.grid_ptr() : share(mu0.grid().subset(idx));
  if (!eval) eval = mu0.grid_ptr();
  EquilibriumSolution sol = equilibrium_measure(cfg, carrier, PotentialField::tabulate(carrier, phi), opts);
  EnvelopeField env = field_on(cfg, std::move(sol), eval, EnvelopeMode::measure_envelope, opts);
  env.carrier = "cells of " + mu0.grid().label() + " above threshold";
  env.carrier_cells = idx.size();
  return env;
}

EnvelopeField envelope_measure(const KernelConfig& cfg, const BallUnionMeasure& mu0, const WeightFunction& phi,
                               GridPtr eval, const EquilibriumOptions& opts) {
  require_domination(cfg);
  GridPtr carrier = mu0.grid();
  if (!eval) eval = carrier;
  EquilibriumSolution sol = equilibrium_measure(cfg, carrier, PotentialField::tabulate(carrier, phi), opts);
  EnvelopeField env = field_on(cfg, std::move(sol), eval, EnvelopeMode::measure_envelope, opts);
  env.carrier = "union of " + std::to_string(mu0.components().size()) + " balls";
  env.carrier_cells = mu0.components().size();
  return env;
}

RegularityReport regularity_check(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phi, double tol,
                                  const EquilibriumOptions& opts) {
  EnvelopeField env = envelope_set(cfg, S, phi, opts);
  RegularityReport rep{-std::numeric_limits<double>::infinity(), 0, false, std::move(env)};
  const PotentialField& f = rep.envelope.field;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (phi[i] == std::numeric_limits<double>::infinity()) continue;
    const double v = f[i] - phi[i];
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.worst_cell = i;
    }
  }
  rep.regular = rep.max_violation <= tol;
  return rep;
}

PotentialPair as_pair(const EnvelopeField& env) {
  if (!env.field.grid->same_as(env.solution.measure.grid())) throw GridMismatch();
  return PotentialPair{env.field, env.solution.measure};
}

double primitive_energy(const PotentialPair& psi, const PotentialPair& psi0) {
  const GridSet& g = *psi.psi.grid;
  if (!g.same_as(*psi0.psi.grid) || !g.same_as(psi.mu.grid()) || !g.same_as(psi0.mu.grid())) throw GridMismatch();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double m = psi.mu.weight(i) + psi0.mu.weight(i);
    if (m != 0.0) s += (psi.psi[i] - psi0.psi[i]) * m;
  }
  return 0.5 * s;
}

LegendreReport legendre_gap(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phi,
                            const PotentialField& u, const EquilibriumOptions& opts) {
  require_domination(cfg);
  const PotentialField shifted = phi + u;
  // Left side: the two minimal weighted energies.
  const EquilibriumSolution a = equilibrium_measure(cfg, S, shifted, opts);
  const EquilibriumSolution b = equilibrium_measure(cfg, S, phi, opts);
  LegendreReport rep;
  rep.direct = a.energy_value - b.energy_value;
  // Right side: primitive energy of the envelopes psi_mu - C.
  const PotentialPair pa{a.potential.plus(-a.frostman_constant), a.measure};
  const PotentialPair pb{b.potential.plus(-b.frostman_constant), b.measure};
  rep.primitive = primitive_energy(pa, pb);
  rep.gap = std::abs(rep.direct - rep.primitive);
  return rep;
}

}  // namespace potlab
