#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "potlab/core/measure.hpp"

namespace potlab {

using cplx = std::complex<double>;

/// A measure on R or C discretized as weighted quadrature nodes. Nodes that
/// come from grid cells remember their cell so densities can be binned back.
struct SpectralMeasure {
  std::vector<cplx> nodes;
  std::vector<double> weights;
  std::vector<std::size_t> cell;  // owning cell per node; empty without a grid
  GridPtr grid;
  bool real_support = true;
  std::string label;

  double mass() const;

  /// Cells integrated with order-point Gauss rules (uniform density inside
  /// each cell), exact for polynomials of degree 2*order-1 in each variable.
  static SpectralMeasure from_grid(const GridMeasure& mu, int order);
  /// Per-ball Gauss rules; weights carried through their logarithms.
  static SpectralMeasure from_balls(const BallUnionMeasure& mu, int order);
  /// Equilibrium (arcsine) measure of [a,b], Gauss-Chebyshev nodes.
  static SpectralMeasure arcsine(double a, double b, int nodes);
  /// Normalized Lebesgue measure of [a,b], Gauss-Legendre nodes.
  static SpectralMeasure lebesgue(double a, double b, int nodes);
};

/// Orthonormal polynomials p_0..p_n in L^2(mu). Internally built in the
/// variable (z - shift) / scale, which leaves the recurrence well conditioned.
class OPBasis {
 public:
  std::shared_ptr<const SpectralMeasure> measure;
  int requested_degree = 0;
  /// Degree actually built; below requested_degree after a NumericLoss.
  int degree = 0;
  std::optional<int> numeric_loss;
  std::vector<double> log_kappa;  // log of the leading coefficients, k = 0..degree
  cplx shift = 0.0;
  double scale = 1.0;
  /// Hessenberg coefficients in the scaled variable: column k holds
  /// h_{0,k}..h_{k+1,k} with w p_k = sum_j h_{j,k} p_j.
  std::vector<std::vector<cplx>> H;
  int quadrature_order = 0;

  bool real_support() const { return measure->real_support; }
  std::vector<double> kappa() const;
  /// Three-term recurrence x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}
  /// in the original variable (real support only): a_0..a_{n-1}, b_1..b_n.
  std::vector<double> recurrence_a() const;
  std::vector<double> recurrence_b() const;

  /// p_0(z)..p_k(z).
  std::vector<cplx> evaluate(cplx z, int k) const;
  /// Values at the quadrature nodes, one column per degree 0..k.
  Eigen::MatrixXcd nodal_values(int k) const;
  /// Gram matrix of p_0..p_degree under the quadrature.
  Eigen::MatrixXcd gram() const;
  /// Largest entrywise deviation of the Gram matrix from the identity.
  double gram_error() const;
};

/// Stieltjes with full reorthogonalization on R, Gram-Schmidt of z p_k against
/// all previous p_j (twice) on C. Norms below 1e-14 of the current scale stop
/// the construction and record the degree in numeric_loss.
OPBasis build_basis(std::shared_ptr<const SpectralMeasure> mu, int n);
OPBasis build_basis(const GridMeasure& mu, int n, int order = 0);
OPBasis build_basis(const BallUnionMeasure& mu, int n, int order = 0);

/// inf E over [a,b] for the logarithmic kernel, log(4/(b-a)).
double interval_robin(double a, double b);

enum class Regularity { regular, irregular, inconclusive };
std::string to_string(Regularity r);

struct RegularityVerdict {
  std::vector<int> degrees;
  std::vector<double> rates;  // k^{-1} log kappa_k
  double target = 0.0;
  double margin = 0.05;
  /// Smallest |rate - target| over the top quartile of degrees.
  double min_deviation = 0.0;
  double max_deviation = 0.0;
  Regularity verdict = Regularity::inconclusive;
};

/// regular when every rate in k in [0.75 n, n] is within margin of target,
/// irregular when every one of them is off by more than 0.15.
RegularityVerdict regularity_rate(const OPBasis& basis, double target, double margin = 0.05);

/// K_k(z,z)/(k+1) = (1/(k+1)) sum_{j<=k} |p_j(z)|^2.
double christoffel_function(const OPBasis& basis, int k, cplx z);

/// The measure K_k(x,x)/(k+1) mu on the grid of the spectral measure (or on
/// `grid`, locating every node in it).
GridMeasure christoffel_density(const OPBasis& basis, int k, GridPtr grid = nullptr);

/// -(log N! - 2 sum_{j<N} log kappa_j) / (N(N-1)).
double determinantal_free_energy(const OPBasis& basis, int N);
/// log of N! prod_{j<N} kappa_j^{-2}.
double determinantal_log_partition(const OPBasis& basis, int N);

}  // namespace potlab
