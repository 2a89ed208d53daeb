#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "potlab/core/cell.hpp"

namespace potlab {

/// Regular cubic lattice carried by the first `index.size()` cells of a GridSet.
struct LatticeInfo {
  int m = 1;           // lattice dimension (equals the point dimension of its cells)
  Point origin;        // centre of the cell with index (0,0,0)
  double h = 0.0;      // edge length
  std::vector<std::array<int, 3>> index;
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};  // inclusive index bounds
  /// Vertices of the lattice along each axis are origin - h/2 + i*h; `axis_lo/axis_hi`
  /// hold the exact endpoints used to place them.
  std::array<double, 3> axis_lo{0, 0, 0}, axis_hi{0, 0, 0};
  std::array<int, 3> axis_cells{1, 1, 1};
};

/// A circle discretized into `count` equal arcs stored contiguously from `first`.
struct CircleInfo {
  Point center;
  double radius = 0.0;
  std::size_t first = 0;
  std::size_t count = 0;
};

/// Discretization of a compact set as a list of cells. Lattice cells (if any)
/// come first, followed by extra cells of any shape.
class GridSet {
 public:
  GridSet() = default;
  explicit GridSet(std::vector<Cell> cells, std::string label = "cells");

  int dim() const { return dim_; }
  std::size_t size() const { return cells_.size(); }
  const Cell& cell(std::size_t i) const { return cells_[i]; }
  const std::vector<Cell>& cells() const { return cells_; }
  double volume(std::size_t i) const { return cells_[i].volume(); }
  double total_volume() const;
  const std::string& label() const { return label_; }
  std::pair<Point, Point> bounding_box() const;
  double max_cell_size() const;

  const std::optional<LatticeInfo>& lattice() const { return lattice_; }
  std::size_t lattice_count() const { return lattice_ ? lattice_->index.size() : 0; }
  const std::vector<CircleInfo>& circles() const { return circles_; }

  /// [a,b] subset of R, n = round((b-a)/h) cells.
  static GridSet interval(double a, double b, double h);
  /// Axis-aligned box [lo,hi] (dimension of lo), edge close to h.
  static GridSet box(const Point& lo, const Point& hi, double h);
  /// Lattice cells of the box whose centres satisfy pred.
  static GridSet from_predicate(const Point& lo, const Point& hi, double h,
                                const std::function<bool(const Point&)>& pred, std::string label = "region");
  /// Closed ball of radius R; symmetric lattice with edge 2R/round(2R/h), cells with centre inside.
  static GridSet ball(const Point& center, double R, double h);
  static GridSet disk(double R, double h) { return ball(Point{0.0, 0.0}, R, h); }
  /// Circle in the plane with n equal arcs.
  static GridSet circle(const Point& center, double R, int n);
  /// Sphere in R^3 with n near-equal-area patches (Fibonacci nodes).
  static GridSet sphere(const Point& center, double R, int n);
  static GridSet balls(std::vector<Cell> cells, std::string label = "balls");
  /// Polar point cells.
  static GridSet points(const std::vector<Point>& pts, std::string label = "points");

  GridSet with_points(const std::vector<Point>& pts) const;
  /// Cells of this set followed by the cells of other (lattice kept from this set).
  GridSet unite(const GridSet& other) const;
  GridSet translated(const Point& v) const;
  GridSet subset(const std::vector<std::size_t>& idx) const;

  /// Index of a cell containing x, if any.
  std::optional<std::size_t> locate(const Point& x) const;
  /// Candidate node points: lattice vertices, then centres of extra cells.
  std::vector<Point> nodes() const;
  bool same_as(const GridSet& other) const;

 private:
  void build_lookup();
  static long long pack(const std::array<int, 3>& i);

  int dim_ = 0;
  std::vector<Cell> cells_;
  std::string label_;
  std::optional<LatticeInfo> lattice_;
  std::vector<CircleInfo> circles_;
  std::unordered_map<long long, std::size_t> lookup_;
};

using GridPtr = std::shared_ptr<const GridSet>;

inline GridPtr share(GridSet g) { return std::make_shared<const GridSet>(std::move(g)); }

}  // namespace potlab
