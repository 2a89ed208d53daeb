#include "potlab/core/functionals.hpp"

#include <cmath>

#include "potlab/core/cell_integrals.hpp"
#include "potlab/core/errors.hpp"

namespace potlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool charges_polar(const GridMeasure& mu) {
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0.0 && mu.grid().cell(i).shape == CellShape::point) return true;
  return false;
}

// mu re-expressed on target when each charged cell of mu is a cell of target.
bool try_embed(const GridMeasure& mu, const GridPtr& target, std::vector<double>& w) {
  w.assign(target->size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) == 0.0) continue;
    const Cell& c = mu.grid().cell(i);
    auto j = target->locate(c.center);
    if (!j) return false;
    const Cell& t = target->cell(*j);
    if (t.shape != c.shape || t.size != c.size || !(t.center == c.center)) return false;
    w[*j] += mu.weight(i);
  }
  return true;
}

}  // namespace

PotentialField potential(const KernelConfig& cfg, const GridMeasure& mu, const DiagonalRule& diag) {
  auto op = interaction_for(cfg, mu.grid_ptr(), diag);
  std::vector<double> v = op->apply(mu.weights());
  bool singular = false;
  for (double& x : v) {
    x = -x;
    if (std::isinf(x)) singular = true;
  }
  return PotentialField(mu.grid_ptr(), std::move(v), singular);
}

PotentialField potential_on(const KernelConfig& cfg, const GridMeasure& mu, const GridPtr& target,
                            const DiagonalRule& diag) {
  if (mu.grid().same_as(*target)) {
    PotentialField f = potential(cfg, mu, diag);
    f.grid = target;
    return f;
  }
  std::vector<double> w;
  if (try_embed(mu, target, w)) return potential(cfg, GridMeasure(target, std::move(w)), diag);
  std::vector<double> v(target->size());
  bool singular = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = potential_eval(cfg, mu, target->cell(i).center, diag);
    if (std::isinf(v[i])) singular = true;
  }
  return PotentialField(target, std::move(v), singular);
}

double potential_eval(const KernelConfig& cfg, const GridMeasure& mu, const Point& x, const DiagonalRule& diag) {
  double acc = 0.0;
  const GridSet& g = mu.grid();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double w = mu.weight(i);
    if (w == 0.0) continue;
    const Cell& c = g.cell(i);
    double wbar;
    if (c.shape == CellShape::ball) {
      wbar = cell_point_mean(cfg, c, x);
    } else if (c.shape != CellShape::point && c.contains(x, 1e-12)) {
      wbar = diag.value(cfg, c);
    } else {
      const double r = distance(c.center, x);
      wbar = r == 0.0 ? kInf : cfg.radial(r);
    }
    acc += w * wbar;
  }
  if (std::isnan(acc)) throw NonFinite("potential evaluation produced NaN");
  if (std::isinf(acc) && acc < 0.0) throw NonFinite("potential overflow");
  return -acc;
}

double potential_eval(const KernelConfig& cfg, const BallUnionMeasure& mu, const Point& x, const DiagonalRule&) {
  double acc = 0.0;
  for (const BallComponent& b : mu.components()) {
    if (b.weight == 0.0) continue;
    acc += b.weight * cell_point_mean(cfg, Cell{b.center, CellShape::ball, b.radius, Point{}}, x);
  }
  if (!std::isfinite(acc)) throw NonFinite("ball-union potential is not finite");
  return -acc;
}

double energy(const KernelConfig& cfg, const GridMeasure& mu, const DiagonalRule& diag) {
  if (diag.mode == DiagonalRule::Mode::cell_average && charges_polar(mu)) return kInf;
  auto op = interaction_for(cfg, mu.grid_ptr(), diag);
  const std::vector<double> Ww = op->apply(mu.weights());
  double e = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weight(i) != 0.0) e += mu.weight(i) * Ww[i];
  return 0.5 * e;
}

double energy(const KernelConfig& cfg, const BallUnionMeasure& mu, const DiagonalRule& diag) {
  return energy(cfg, mu.as_grid_measure(), diag);
}

double weighted_energy(const KernelConfig& cfg, const GridMeasure& mu, const PotentialField& phi,
                       const DiagonalRule& diag) {
  if (!phi.grid->same_as(mu.grid())) throw GridMismatch();
  double lin = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) == 0.0) continue;
    if (phi[i] == kInf) return kInf;
    lin += mu.weight(i) * phi[i];
  }
  return energy(cfg, mu, diag) + lin;
}

double relative_entropy(const GridMeasure& mu, const GridMeasure& mu0) {
  if (!mu.grid().same_as(mu0.grid())) throw GridMismatch();
  double d = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double a = mu.weight(i);
    if (a <= 0.0) continue;
    const double b = mu0.weight(i);
    if (b <= 0.0) return kInf;
    d += a * std::log(a / b);
  }
  return d;
}

double free_energy_functional(const KernelConfig& cfg, const GridMeasure& mu, const GridMeasure& mu0,
                              const PotentialField& phi, double beta, const DiagonalRule& diag) {
  if (!(beta > 0.0)) throw InvalidInput("beta must be positive");
  const double e = weighted_energy(cfg, mu, phi, diag);
  if (std::isinf(beta)) return e;
  const double D = relative_entropy(mu, mu0);
  if (std::isinf(D)) return kInf;
  return e + D / beta;
}

double energy_distance_sq(const KernelConfig& cfg, const GridMeasure& a, const GridMeasure& b,
                          const DiagonalRule& diag) {
  if (!a.grid().same_as(b.grid())) throw GridMismatch();
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.weight(i) - b.weight(i);
  auto op = interaction_for(cfg, a.grid_ptr(), diag);
  const std::vector<double> Wd = op->apply(d);
  double q = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) q += d[i] * Wd[i];
  return 0.5 * q;
}

}  // namespace potlab
