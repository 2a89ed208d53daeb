#include "potlab/core/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "potlab/core/errors.hpp"

namespace potlab {

namespace {

// Measure of the intersection of balls of radii r1, r2 at distance D in R^k.
double lens_measure(int k, double r1, double r2, double D) {
  const double rs = std::min(r1, r2), rb = std::max(r1, r2);
  if (D >= r1 + r2) return 0.0;
  if (D + rs <= rb) {
    if (k == 1) return 2.0 * rs;
    if (k == 2) return std::numbers::pi * rs * rs;
    return 4.0 / 3.0 * std::numbers::pi * rs * rs * rs;
  }
  if (k == 1) return r1 + r2 - D;
  if (k == 2) {
    const double a1 = std::acos(std::clamp((D * D + r1 * r1 - r2 * r2) / (2.0 * D * r1), -1.0, 1.0));
    const double a2 = std::acos(std::clamp((D * D + r2 * r2 - r1 * r1) / (2.0 * D * r2), -1.0, 1.0));
    return r1 * r1 * (a1 - std::sin(2.0 * a1) / 2.0) + r2 * r2 * (a2 - std::sin(2.0 * a2) / 2.0);
  }
  const double t = r1 + r2 - D;
  return std::numbers::pi * t * t * (D * D + 2.0 * D * (r1 + r2) - 3.0 * (r1 - r2) * (r1 - r2)) / (12.0 * D);
}

}  // namespace

GridMeasure::GridMeasure(GridPtr grid, std::vector<double> weights) : grid_(std::move(grid)), weights_(std::move(weights)) {
  if (!grid_) throw InvalidInput("measure without grid");
  if (weights_.size() != grid_->size()) throw GridMismatch();
  total_mass_ = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("measure weights must be finite and nonnegative");
    total_mass_ += w;
  }
}

GridMeasure GridMeasure::lebesgue(GridPtr grid) {
  return from_masses(std::move(grid), [](const Cell& c) { return c.volume(); });
}

GridMeasure GridMeasure::from_masses(GridPtr grid, const std::function<double(const Cell&)>& mass) {
  std::vector<double> w(grid->size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::max(0.0, mass(grid->cell(i)));
    total += w[i];
  }
  if (!(total > 0.0)) throw InvalidInput("measure has no mass");
  for (double& x : w) x /= total;
  return GridMeasure(std::move(grid), std::move(w));
}

GridMeasure GridMeasure::from_density(GridPtr grid, const std::function<double(const Point&)>& f) {
  return from_masses(std::move(grid), [&](const Cell& c) { return f(c.center) * c.volume(); });
}

GridMeasure GridMeasure::dirac(GridPtr grid, std::size_t cell) {
  std::vector<double> w(grid->size(), 0.0);
  if (cell >= w.size()) throw InvalidInput("cell index out of range");
  w[cell] = 1.0;
  return GridMeasure(std::move(grid), std::move(w));
}

bool GridMeasure::is_probability(double tol) const { return std::abs(total_mass_ - 1.0) <= tol; }

GridMeasure GridMeasure::normalized() const {
  if (!(total_mass_ > 0.0)) throw InvalidInput("cannot normalize a zero measure");
  std::vector<double> w = weights_;
  for (double& x : w) x /= total_mass_;
  return GridMeasure(grid_, std::move(w));
}

std::vector<double> GridMeasure::density() const {
  std::vector<double> d(weights_.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = grid_->volume(i);
    d[i] = v > 0.0 ? weights_[i] / v : 0.0;
  }
  return d;
}

std::vector<std::size_t> GridMeasure::support(double threshold) const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] > threshold) s.push_back(i);
  return s;
}

GridMeasure embed(const GridMeasure& mu, const GridPtr& target) {
  if (mu.grid().same_as(*target)) return GridMeasure(target, mu.weights());
  std::vector<double> w(target->size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) == 0.0) continue;
    auto j = target->locate(mu.grid().cell(i).center);
    if (!j) throw GridMismatch();
    w[*j] += mu.weight(i);
  }
  return GridMeasure(target, std::move(w));
}

double l1_distance(const GridMeasure& a, const GridMeasure& b) {
  if (!a.grid().same_as(b.grid())) throw GridMismatch();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.weight(i) - b.weight(i));
  return s;
}

double w1_distance_1d(const GridMeasure& a, const GridMeasure& b) {
  if (!a.grid().same_as(b.grid())) throw GridMismatch();
  std::vector<std::size_t> order(a.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const GridSet& g = a.grid();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return g.cell(i).center[0] < g.cell(j).center[0]; });
  double cum = 0.0, total = 0.0;
  for (std::size_t n = 0; n + 1 < order.size(); ++n) {
    cum += a.weight(order[n]) - b.weight(order[n]);
    total += std::abs(cum) * (g.cell(order[n + 1]).center[0] - g.cell(order[n]).center[0]);
  }
  return total;
}

// ---------------------------------------------------------------------------

BallUnionMeasure::BallUnionMeasure(std::vector<BallComponent> components, bool normalize)
    : components_(std::move(components)), normalized_(normalize) {
  if (components_.empty()) throw InvalidInput("ball union has no components");
  dim_ = 0;
  double lse_max = -std::numeric_limits<double>::infinity();
  for (BallComponent& c : components_) {
    if (!(c.radius > 0.0) || !std::isfinite(c.radius)) throw InvalidInput("ball radii must be positive and finite");
    if (c.weight > 0.0) c.log_weight = std::log(c.weight);
    if (!std::isfinite(c.log_weight)) throw InvalidInput("ball weights must be positive and finite");
    dim_ = std::max(dim_, c.center.dim);
    lse_max = std::max(lse_max, c.log_weight);
  }
  if (normalize) {
    double s = 0.0;
    for (const BallComponent& c : components_) s += std::exp(c.log_weight - lse_max);
    const double lse = lse_max + std::log(s);
    for (BallComponent& c : components_) {
      c.log_weight -= lse;
      c.weight = std::exp(c.log_weight);
    }
  }
}

double BallUnionMeasure::total_mass() const {
  double s = 0.0;
  for (const BallComponent& c : components_) s += c.weight;
  return s;
}

GridPtr BallUnionMeasure::grid() const {
  if (!grid_) {
    std::vector<Cell> cells;
    cells.reserve(components_.size());
    for (const BallComponent& c : components_) cells.push_back(Cell{c.center, CellShape::ball, c.radius, Point{}});
    grid_ = share(GridSet::balls(std::move(cells), "ball union n=" + std::to_string(components_.size())));
  }
  return grid_;
}

GridMeasure BallUnionMeasure::as_grid_measure() const {
  std::vector<double> w;
  w.reserve(components_.size());
  for (const BallComponent& c : components_) w.push_back(c.weight);
  return GridMeasure(grid(), std::move(w));
}

double BallUnionMeasure::ball_mass(const Point& z, double r) const {
  double m = 0.0;
  for (const BallComponent& c : components_) {
    const int k = c.center.dim;
    const double D = distance(c.center, z);
    const double own = Cell{c.center, CellShape::ball, c.radius, Point{}}.volume();
    m += c.weight * std::min(1.0, lens_measure(k, c.radius, r, D) / own);
  }
  return m;
}

// ---------------------------------------------------------------------------

PotentialField::PotentialField(GridPtr g, std::vector<double> v, bool sing)
    : grid(std::move(g)), values(std::move(v)), singular(sing) {
  if (!grid || values.size() != grid->size()) throw GridMismatch();
}

PotentialField PotentialField::constant(GridPtr g, double c) {
  const std::size_t n = g->size();
  return PotentialField(std::move(g), std::vector<double>(n, c));
}

PotentialField PotentialField::tabulate(GridPtr g, const std::function<double(const Point&)>& f) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g->cell(i).center);
  return PotentialField(std::move(g), std::move(v));
}

double PotentialField::max() const { return *std::max_element(values.begin(), values.end()); }
double PotentialField::min() const { return *std::min_element(values.begin(), values.end()); }

PotentialField PotentialField::plus(double c) const {
  PotentialField f = *this;
  for (double& v : f.values) v += c;
  return f;
}

PotentialField PotentialField::scaled(double s) const {
  PotentialField f = *this;
  for (double& v : f.values) v *= s;
  return f;
}

std::vector<double> PotentialField::clamped(double floor) const {
  std::vector<double> v = values;
  for (double& x : v)
    if (x < floor) x = floor;
  return v;
}

PotentialField operator+(const PotentialField& a, const PotentialField& b) {
  if (!a.grid->same_as(*b.grid)) throw GridMismatch();
  PotentialField f = a;
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += b.values[i];
  f.singular = a.singular || b.singular;
  return f;
}

PotentialField operator-(const PotentialField& a, const PotentialField& b) {
  if (!a.grid->same_as(*b.grid)) throw GridMismatch();
  PotentialField f = a;
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] -= b.values[i];
  f.singular = a.singular || b.singular;
  return f;
}

PotentialField restrict_field(const PotentialField& f, const GridPtr& sub, const std::vector<std::size_t>& idx) {
  if (idx.size() != sub->size()) throw GridMismatch();
  std::vector<double> v(idx.size());
  for (std::size_t n = 0; n < idx.size(); ++n) v[n] = f.values.at(idx[n]);
  return PotentialField(sub, std::move(v), f.singular);
}

}  // namespace potlab
