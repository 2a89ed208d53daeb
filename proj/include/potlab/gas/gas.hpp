#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "potlab/core/functionals.hpp"

namespace potlab {

struct GasConfig {
  int N = 2;
  double beta_N = 1.0;  // inverse temperature multiplying the Hamiltonian
  int sweeps = 10000;
  int burn_in = -1;     // sweeps discarded; -1 means 20% of sweeps
  int chains = 1;
  double proposal_scale = 0.1;
  std::uint64_t seed = 1;
  int thin = 0;         // store every thin-th sweep (0 stores nothing)
  double local_fraction = 0.8;
};

struct ParticleConfig {
  std::vector<Point> positions;
  double hamiltonian = 0.0;
};

/// Symmetric pair interaction W(x, y).
class PairInteraction {
 public:
  enum class Kind { riesz, separable_V, custom };

  static PairInteraction riesz(const KernelConfig& cfg);
  /// W(x, y) = V(x) + V(y).
  static PairInteraction separable(std::function<double(const Point&)> V);
  /// Arbitrary symmetric W; singular kernels forbid coincident particles.
  static PairInteraction custom(std::function<double(const Point&, const Point&)> W, bool singular);

  Kind kind() const { return kind_; }
  bool singular() const { return singular_; }
  double operator()(const Point& x, const Point& y) const;
  /// V itself for separable interactions.
  double single(const Point& x) const;

 private:
  Kind kind_ = Kind::custom;
  bool singular_ = false;
  std::function<double(const Point&, const Point&)> W_;
  std::function<double(const Point&)> V_;
};

/// (1/(N-1)) sum_{i<j} W(x_i, x_j) + sum_i phi(x_i).
double hamiltonian(const PairInteraction& W, const std::vector<Point>& x, const WeightFunction& phi);

/// A probability measure that can be sampled and whose density (w.r.t. the
/// natural measure of its cells) can be evaluated.
class ReferenceMeasure {
 public:
  explicit ReferenceMeasure(const GridMeasure& mu0);
  explicit ReferenceMeasure(const BallUnionMeasure& mu0);
  Point sample(std::mt19937_64& rng) const;
  /// Density at x; 0 off the support, +inf on atoms.
  double density(const Point& x) const;
  int dim() const { return dim_; }

 private:
  struct Piece {
    Cell cell;
    double density;
  };
  std::vector<Piece> pieces_;
  std::vector<double> cumulative_;
  GridPtr grid_;  // for cell lookup (grid measures)
  int dim_ = 1;
};

struct ChainSummary {
  double mean_H = 0.0;
  double se_H = 0.0;
  double acceptance = 0.0;
};

struct SampleRecord {
  int chain = 0;
  int sweep = 0;
  ParticleConfig config;
};

struct GibbsResult {
  std::vector<SampleRecord> samples;
  std::vector<ChainSummary> chains;
  double mean_H = 0.0;
  double se_H = 0.0;
  double acceptance = 0.0;
};

/// Called after every post-burn-in sweep with the current positions.
using SweepObserver = std::function<void(int chain, const std::vector<Point>&)>;

/// Metropolis sampler of exp(-beta_N H) mu0^N with single-particle moves.
GibbsResult sample_gibbs(const PairInteraction& W, const ReferenceMeasure& mu0, const WeightFunction& phi,
                         const GasConfig& gas, const SweepObserver& observer = {});

/// Histogram of all stored particle positions on the cells of grid, mass 1.
GridMeasure empirical_expectation(const std::vector<SampleRecord>& samples, const GridPtr& grid);

struct FeketeResult {
  ParticleConfig config;
  double F = 0.0;  // H / N
};

/// Cyclic single-particle descent on the candidate nodes of S.
FeketeResult fekete_points(const PairInteraction& W, const GridPtr& S, const WeightFunction& phi, int N,
                           int restarts, std::uint64_t seed);

struct TIRow {
  double beta = 0.0;
  double mean_H = 0.0;
  double se_H = 0.0;
  double logZ = 0.0;
  double se = 0.0;
  double F_N = 0.0;  // -log Z / (beta N); NaN at beta = 0
};

/// log Z(beta) = -int_0^beta <H>_b db by the trapezoid rule on beta_grid (starting at 0).
std::vector<TIRow> free_energy_ti(const PairInteraction& W, const ReferenceMeasure& mu0, const WeightFunction& phi,
                                  const GasConfig& gas, const std::vector<double>& beta_grid);

}  // namespace potlab
