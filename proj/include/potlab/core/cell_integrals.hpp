#pragma once

#include <array>

#include "potlab/core/cell.hpp"
#include "potlab/core/kernel.hpp"

namespace potlab {

/// Mean of W over independent uniform points in two axis-aligned cubes of edge h
/// in R^k whose centres differ by h * offset. Exact up to quadrature error in the
/// smooth directions; the singular part is integrated in closed form.
double cube_pair_mean(const KernelConfig& cfg, int k, double h, const std::array<int, 3>& offset);

/// Mean of W over two independent uniform points of two collinear segments of
/// lengths l1, l2 whose centres are a distance D apart. Safe for lengths far
/// below the separation and for radii near the underflow threshold.
double collinear_mean(const KernelConfig& cfg, double l1, double l2, double D);

/// Mean of W(x, y) over y uniform on a segment of length l, where x sits on the
/// segment's line at signed offset t from its centre.
double point_segment_mean(const KernelConfig& cfg, double l, double t);

/// Mean of W over a pair of independent uniform points of the same cell
/// (the cell-average diagonal value). +infinity for point cells.
double cell_self_mean(const KernelConfig& cfg, const Cell& c);

/// Mean of W(x, y) over y uniform in the cell.
double cell_point_mean(const KernelConfig& cfg, const Cell& c, const Point& x);

/// Mean of W over independent uniform points of two distinct cells.
double cell_pair_mean(const KernelConfig& cfg, const Cell& a, const Cell& b);

/// Second-order far-field mean of W between two cubes of edge h in R^k whose
/// centres differ by h * offset (used beyond the exact near range).
double cube_far_mean(const KernelConfig& cfg, int k, double h, const std::array<int, 3>& offset);

}  // namespace potlab
