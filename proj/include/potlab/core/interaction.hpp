#pragma once

#include <memory>
#include <string>
#include <vector>

#include "potlab/core/grid.hpp"
#include "potlab/core/kernel.hpp"

namespace potlab {

/// How the singular diagonal of the pair matrix is handled.
struct DiagonalRule {
  enum class Mode { cell_average, exclude };
  Mode mode = Mode::cell_average;

  /// Self-interaction value of a cell: the exact mean of W over two independent
  /// uniform points of the cell, or 0 when the diagonal is excluded.
  double value(const KernelConfig& cfg, const Cell& c) const;
};

/// The matrix Wbar_ij of cell-pair kernel means on a fixed grid, applied to
/// weight vectors. Lattice blocks use FFT convolution; small grids are dense.
class InteractionOperator {
 public:
  InteractionOperator(const KernelConfig& cfg, GridPtr grid, DiagonalRule diag = {});
  ~InteractionOperator();
  InteractionOperator(const InteractionOperator&) = delete;
  InteractionOperator& operator=(const InteractionOperator&) = delete;

  std::size_t size() const;
  const KernelConfig& kernel() const;
  const GridPtr& grid() const;
  const DiagonalRule& diagonal_rule() const;
  /// "dense", "fft" or "matrix-free".
  std::string method() const;

  /// out = Wbar w. A positive weight on a point cell makes its own entry +inf.
  void apply(const std::vector<double>& w, std::vector<double>& out) const;
  std::vector<double> apply(const std::vector<double>& w) const;

  double diagonal(std::size_t i) const;
  double entry(std::size_t i, std::size_t j) const;
  /// True for point cells (infinite self-energy).
  bool polar(std::size_t i) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Shared operator for (cfg, grid, diagonal rule); built once and cached.
std::shared_ptr<const InteractionOperator> interaction_for(const KernelConfig& cfg, const GridPtr& grid,
                                                           const DiagonalRule& diag = {});

}  // namespace potlab
