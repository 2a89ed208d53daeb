#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "potlab/core/grid.hpp"

namespace potlab {

/// Nonnegative weights on the cells of a GridSet.
class GridMeasure {
 public:
  GridMeasure(GridPtr grid, std::vector<double> weights);

  /// Normalized Lebesgue (Hausdorff) measure: weights proportional to cell volume.
  static GridMeasure lebesgue(GridPtr grid);
  /// Normalized measure with cell masses given by mass(cell).
  static GridMeasure from_masses(GridPtr grid, const std::function<double(const Cell&)>& mass);
  /// Normalized measure with density f sampled at cell centres.
  static GridMeasure from_density(GridPtr grid, const std::function<double(const Point&)>& f);
  static GridMeasure dirac(GridPtr grid, std::size_t cell);

  const GridSet& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::size_t size() const { return weights_.size(); }
  double total_mass() const { return total_mass_; }
  bool is_probability(double tol = 1e-12) const;
  GridMeasure normalized() const;
  /// Weight divided by cell volume (0 on point cells).
  std::vector<double> density() const;
  /// Indices of cells with weight above threshold.
  std::vector<std::size_t> support(double threshold = 0.0) const;

 private:
  GridPtr grid_;
  std::vector<double> weights_;
  double total_mass_ = 0.0;
};

/// Same measure re-expressed on a grid whose cells include all cells of mu's grid.
GridMeasure embed(const GridMeasure& mu, const GridPtr& target);

/// L1 distance between two measures on a common grid.
double l1_distance(const GridMeasure& a, const GridMeasure& b);

/// Wasserstein-1 distance between measures on a common interval-like grid
/// (cells ordered along the first coordinate).
double w1_distance_1d(const GridMeasure& a, const GridMeasure& b);

struct BallComponent {
  Point center;
  double radius = 0.0;
  double weight = 0.0;
  /// log of the weight; kept so that weights far below the double range stay ordered.
  double log_weight = 0.0;
};

/// Finite mixture of uniform balls.
class BallUnionMeasure {
 public:
  /// Components are taken with their log_weight; normalize rescales to mass 1.
  BallUnionMeasure(std::vector<BallComponent> components, bool normalize);

  const std::vector<BallComponent>& components() const { return components_; }
  bool normalized() const { return normalized_; }
  int dim() const { return dim_; }
  double total_mass() const;

  /// Set K the measure is meant to be supported on (reported by constructions).
  std::optional<std::pair<Point, Point>> support_box;

  /// Ball cells with the component weights.
  GridPtr grid() const;
  GridMeasure as_grid_measure() const;
  /// Exact mass of the closed ball B_r(z).
  double ball_mass(const Point& z, double r) const;

 private:
  std::vector<BallComponent> components_;
  bool normalized_ = false;
  int dim_ = 1;
  mutable GridPtr grid_;
};

/// Values of a potential or weight on the cells of a grid.
struct PotentialField {
  GridPtr grid;
  std::vector<double> values;
  /// true when -inf entries are present by design (point masses).
  bool singular = false;

  PotentialField() = default;
  PotentialField(GridPtr g, std::vector<double> v, bool sing = false);
  static PotentialField constant(GridPtr g, double c);
  static PotentialField tabulate(GridPtr g, const std::function<double(const Point&)>& f);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double max() const;
  double min() const;
  PotentialField plus(double c) const;
  PotentialField scaled(double s) const;
  /// Copy with -inf entries replaced by floor (reporting only).
  std::vector<double> clamped(double floor = -1e12) const;
};

PotentialField operator+(const PotentialField& a, const PotentialField& b);
PotentialField operator-(const PotentialField& a, const PotentialField& b);

/// Restrict a field to a subset of its grid given by idx.
PotentialField restrict_field(const PotentialField& f, const GridPtr& sub, const std::vector<std::size_t>& idx);

}  // namespace potlab
