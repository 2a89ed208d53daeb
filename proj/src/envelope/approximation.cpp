#include <cmath>

#include "potlab/core/errors.hpp"
#include "potlab/envelope/envelope.hpp"
#include "potlab/meanfield/meanfield.hpp"

namespace potlab {

ApproximationSequence energy_approximation_sequence(const KernelConfig& cfg, const GridMeasure& mu,
                                                    const GridMeasure& mu0, const std::vector<double>& beta_schedule,
                                                    double settle_tol) {
  if (!mu.grid().same_as(mu0.grid())) throw GridMismatch();
  ApproximationSequence seq;
  seq.target_energy = energy(cfg, mu);
  // E_{psi_mu}(nu) = E(nu - mu) - E(mu): the minimizers approach mu.
  const PotentialField phi = potential(cfg, mu);
  MeanFieldOptions opts;
  for (double beta : beta_schedule) {
    MeanFieldSolution sol = solve_meanfield(cfg, mu0, phi, beta, opts);
    seq.steps.push_back(ApproximationStep{beta, sol.measure, energy(cfg, sol.measure)});
    opts.init = sol.measure.weights();
    opts.init_beta = beta;
  }
  const std::size_t k = seq.steps.size();
  if (k >= 2) {
    const double a = seq.steps[k - 1].energy, b = seq.steps[k - 2].energy;
    seq.settled = std::abs(a - b) <= settle_tol * std::max(1.0, std::abs(a));
  }
  return seq;
}

}  // namespace potlab
