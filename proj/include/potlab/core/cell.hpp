#pragma once

#include <string>

#include "potlab/core/point.hpp"

namespace potlab {

/// Geometry of one discretization cell.
///  cube:    axis-aligned cube of edge `size` in the point dimension of `center`
///  segment: straight piece of length `size` along the unit vector `axis`
///  patch:   flat surface element of area size^2 with unit normal `axis`,
///           treated as a disk of equal area
///  ball:    ball of radius `size` in the point dimension of `center`
///  point:   a single point (size 0); polar, infinite self-energy
enum class CellShape { cube, segment, patch, ball, point };

struct Cell {
  Point center;
  CellShape shape = CellShape::cube;
  double size = 0.0;
  Point axis;

  /// Hausdorff measure of the cell in its own dimension.
  double volume() const;
  /// Radius of a ball containing the cell.
  double radius() const;
  /// Intrinsic dimension (0 for points).
  int intrinsic_dim() const;
  /// Whether x lies in the closed cell, up to a relative slack.
  bool contains(const Point& x, double slack = 1e-12) const;
};

std::string to_string(CellShape s);
CellShape shape_from_string(const std::string& s);

}  // namespace potlab
