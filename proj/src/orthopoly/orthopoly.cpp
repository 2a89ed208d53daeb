#include "potlab/orthopoly/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>

#include "potlab/core/errors.hpp"
#include "potlab/core/quadrature.hpp"

namespace potlab {

namespace {

constexpr double kLossRatio = 1e-14;
// largest Gram deviation accepted for the basis as re-evaluated by its recurrence
constexpr double kGramTol = 1e-8;

cplx to_complex(const Point& p) { return {p[0], p.dim >= 2 ? p[1] : 0.0}; }

void push(SpectralMeasure& m, cplx z, double w, std::size_t cell) {
  if (!(w > 0.0)) return;
  m.nodes.push_back(z);
  m.weights.push_back(w);
  m.cell.push_back(cell);
}

/// Gauss nodes of a cell with total weight w, uniform density inside.
void add_cell(SpectralMeasure& m, const Cell& c, double w, std::size_t idx, int order) {
  const int dim = c.center.dim;
  if (dim > 2) throw Unsupported("orthogonal polynomials need cells in R or C");
  switch (c.shape) {
    case CellShape::point:
      push(m, to_complex(c.center), w, idx);
      return;
    case CellShape::segment: {
      const QuadratureRule& r = gauss_legendre(order);
      for (int i = 0; i < order; ++i) {
        const Point p = c.center + (0.5 * c.size * r.nodes[i]) * c.axis;
        push(m, to_complex(p), w * 0.5 * r.weights[i], idx);
      }
      return;
    }
    case CellShape::cube: {
      const QuadratureRule& r = gauss_legendre(order);
      const double h = 0.5 * c.size;
      if (dim == 1) {
        for (int i = 0; i < order; ++i) push(m, {c.center[0] + h * r.nodes[i], 0.0}, w * 0.5 * r.weights[i], idx);
      } else {
        for (int i = 0; i < order; ++i)
          for (int j = 0; j < order; ++j)
            push(m, {c.center[0] + h * r.nodes[i], c.center[1] + h * r.nodes[j]},
                 w * 0.25 * r.weights[i] * r.weights[j], idx);
      }
      return;
    }
    case CellShape::ball: {
      const QuadratureRule& r = gauss_legendre(order);
      if (dim == 1) {
        for (int i = 0; i < order; ++i)
          push(m, {c.center[0] + c.size * r.nodes[i], 0.0}, w * 0.5 * r.weights[i], idx);
        return;
      }
      // polar rule: radial Gauss for r dr, equispaced angles
      const int na = 2 * order + 1;
      const cplx z0 = to_complex(c.center);
      for (int i = 0; i < order; ++i) {
        const double t = 0.5 * (r.nodes[i] + 1.0);
        const double wr = r.weights[i] * t;  // int_0^1 2t dt = 1
        for (int a = 0; a < na; ++a) {
          const double th = 2.0 * std::numbers::pi * a / na;
          push(m, z0 + c.size * t * cplx(std::cos(th), std::sin(th)), w * wr / na, idx);
        }
      }
      return;
    }
    case CellShape::patch:
      throw Unsupported("orthogonal polynomials need cells in R or C");
  }
}

void finish(SpectralMeasure& m) {
  m.real_support = std::all_of(m.nodes.begin(), m.nodes.end(), [](cplx z) { return z.imag() == 0.0; });
  if (m.nodes.empty()) throw InvalidInput("measure has no mass");
}

template <class T>
T conj_of(T v) {
  if constexpr (std::is_same_v<T, double>) return v;
  else return std::conj(v);
}

template <class T>
void build_impl(OPBasis& B, const std::vector<T>& w, const std::vector<double>& wt, int n) {
  const std::size_t M = w.size();
  double mass = 0.0;
  for (double x : wt) mass += x;
  auto dot = [&](const std::vector<T>& a, const std::vector<T>& b) {
    T s{};
    for (std::size_t i = 0; i < M; ++i) s += wt[i] * conj_of(a[i]) * b[i];
    return s;
  };
  auto nrm = [&](const std::vector<T>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < M; ++i) s += wt[i] * std::norm(a[i]);
    return std::sqrt(s);
  };

  // L^2 of a measure on D distinct points has dimension D; nodes that coincide
  // in floating point (tiny balls) would otherwise feed noise into the basis
  // (nodes are in the scaled variable, |w| <= 1, and merge below 1e-12)
  std::vector<std::pair<long long, long long>> keys;
  for (std::size_t i = 0; i < M; ++i)
    if (wt[i] > 0.0)
      keys.emplace_back(std::llround(std::real(w[i]) * 1e12), std::llround(std::imag(cplx(w[i])) * 1e12));
  std::sort(keys.begin(), keys.end());
  const int distinct = static_cast<int>(std::unique(keys.begin(), keys.end()) - keys.begin());

  std::vector<std::vector<T>> V;
  V.emplace_back(M, T(1.0 / std::sqrt(mass)));
  B.log_kappa.assign(1, -0.5 * std::log(mass));
  B.H.clear();
  B.degree = 0;
  std::vector<T> q(M);
  for (int k = 0; k < n; ++k) {
    if (k + 1 >= distinct) {
      B.numeric_loss = k + 1;
      break;
    }
    for (std::size_t i = 0; i < M; ++i) q[i] = w[i] * V[k][i];
    const double ref = nrm(q);
    std::vector<cplx> col(k + 2, 0.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = k; j >= 0; --j) {
        const T h = dot(V[j], q);
        for (std::size_t i = 0; i < M; ++i) q[i] -= h * V[j][i];
        col[j] += h;
      }
    }
    const double beta = nrm(q);
    if (!(ref > 0.0) || beta < kLossRatio * ref) {
      B.numeric_loss = k + 1;
      break;
    }
    col[k + 1] = beta;
    for (std::size_t i = 0; i < M; ++i) q[i] /= beta;
    V.push_back(q);
    B.H.push_back(std::move(col));
    B.log_kappa.push_back(B.log_kappa.back() - std::log(beta));
    B.degree = k + 1;
  }
}

}  // namespace

double SpectralMeasure::mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

SpectralMeasure SpectralMeasure::from_grid(const GridMeasure& mu, int order) {
  if (order < 1) throw InvalidInput("quadrature order must be positive");
  SpectralMeasure m;
  m.grid = mu.grid_ptr();
  m.label = mu.grid().label();
  for (std::size_t i = 0; i < mu.size(); ++i) add_cell(m, mu.grid().cell(i), mu.weight(i), i, order);
  finish(m);
  return m;
}

SpectralMeasure SpectralMeasure::from_balls(const BallUnionMeasure& mu, int order) {
  if (order < 1) throw InvalidInput("quadrature order must be positive");
  const auto& comps = mu.components();
  double top = -std::numeric_limits<double>::infinity();
  for (const BallComponent& c : comps) top = std::max(top, c.log_weight);
  std::vector<double> rel(comps.size());
  double total = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) total += rel[i] = std::exp(comps[i].log_weight - top);
  SpectralMeasure m;
  m.grid = mu.grid();
  m.label = m.grid->label();
  for (std::size_t i = 0; i < comps.size(); ++i)
    add_cell(m, m.grid->cell(i), rel[i] / total, i, order);
  finish(m);
  return m;
}

SpectralMeasure SpectralMeasure::arcsine(double a, double b, int nodes) {
  SpectralMeasure m;
  const QuadratureRule r = gauss_chebyshev(nodes);
  for (int i = 0; i < nodes; ++i) {
    m.nodes.emplace_back(0.5 * (a + b) + 0.5 * (b - a) * r.nodes[i], 0.0);
    m.weights.push_back(r.weights[i]);
  }
  m.label = "arcsine";
  finish(m);
  return m;
}

SpectralMeasure SpectralMeasure::lebesgue(double a, double b, int nodes) {
  SpectralMeasure m;
  const QuadratureRule& r = gauss_legendre(nodes);
  for (int i = 0; i < nodes; ++i) {
    m.nodes.emplace_back(0.5 * (a + b) + 0.5 * (b - a) * r.nodes[i], 0.0);
    m.weights.push_back(0.5 * r.weights[i]);
  }
  m.label = "lebesgue";
  finish(m);
  return m;
}

OPBasis build_basis(std::shared_ptr<const SpectralMeasure> mu, int n) {
  if (n < 0) throw InvalidInput("degree must be nonnegative");
  OPBasis B;
  B.measure = mu;
  B.requested_degree = n;
  const double mass = mu->mass();
  if (!(mass > 0.0)) throw InvalidInput("measure has no mass");
  cplx c = 0.0;
  for (std::size_t i = 0; i < mu->nodes.size(); ++i) c += mu->weights[i] * mu->nodes[i];
  c /= mass;
  double s = 0.0;
  for (cplx z : mu->nodes) s = std::max(s, std::abs(z - c));
  if (mu->real_support) c = c.real();
  B.shift = c;
  B.scale = s > 0.0 ? s : 1.0;
  if (mu->real_support) {
    std::vector<double> w(mu->nodes.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (mu->nodes[i].real() - c.real()) / B.scale;
    build_impl(B, w, mu->weights, n);
  } else {
    std::vector<cplx> w(mu->nodes.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (mu->nodes[i] - c) / B.scale;
    build_impl(B, w, mu->weights, n);
  }
  // back to the original variable
  for (int k = 1; k <= B.degree; ++k) B.log_kappa[k] -= k * std::log(B.scale);
  // The vectors are orthonormal at the nodes, but the recurrence that evaluates
  // p_k elsewhere can still amplify rounding (clustered or very uneven measures).
  if (B.degree > 0) {
    const Eigen::MatrixXcd G = B.gram();
    for (int k = 1; k <= B.degree; ++k) {
      double e = 0.0;
      for (int i = 0; i <= k; ++i) e = std::max(e, std::abs(G(i, k) - (i == k ? 1.0 : 0.0)));
      if (e > kGramTol) {
        B.degree = k - 1;
        B.H.resize(k - 1);
        B.log_kappa.resize(k);
        B.numeric_loss = k;
        break;
      }
    }
  }
  return B;
}

OPBasis build_basis(const GridMeasure& mu, int n, int order) {
  auto m = std::make_shared<SpectralMeasure>(SpectralMeasure::from_grid(mu, order > 0 ? order : n + 1));
  OPBasis B = build_basis(m, n);
  B.quadrature_order = order > 0 ? order : n + 1;
  return B;
}

OPBasis build_basis(const BallUnionMeasure& mu, int n, int order) {
  auto m = std::make_shared<SpectralMeasure>(SpectralMeasure::from_balls(mu, order > 0 ? order : n + 1));
  OPBasis B = build_basis(m, n);
  B.quadrature_order = order > 0 ? order : n + 1;
  return B;
}

std::vector<double> OPBasis::kappa() const {
  std::vector<double> k(log_kappa.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(log_kappa[i]);
  return k;
}

std::vector<double> OPBasis::recurrence_a() const {
  if (!real_support()) throw Unsupported("three-term recurrence needs real support");
  std::vector<double> a(degree);
  for (int k = 0; k < degree; ++k) a[k] = shift.real() + scale * H[k][k].real();
  return a;
}

std::vector<double> OPBasis::recurrence_b() const {
  if (!real_support()) throw Unsupported("three-term recurrence needs real support");
  std::vector<double> b(degree);
  for (int k = 0; k < degree; ++k) b[k] = scale * H[k][k + 1].real();
  return b;
}

std::vector<cplx> OPBasis::evaluate(cplx z, int k) const {
  if (k > degree) {
    if (numeric_loss) throw NumericLoss(*numeric_loss);
    throw InvalidInput("degree above the basis degree");
  }
  const cplx w = (z - shift) / scale;
  std::vector<cplx> p(k + 1);
  // leading coefficient of p_0 in the scaled variable equals the original one
  p[0] = std::exp(log_kappa[0]);
  for (int j = 0; j < k; ++j) {
    cplx v = w * p[j];
    for (int i = 0; i <= j; ++i) v -= H[j][i] * p[i];
    p[j + 1] = v / H[j][j + 1];
  }
  return p;
}

Eigen::MatrixXcd OPBasis::nodal_values(int k) const {
  const auto& nodes = measure->nodes;
  Eigen::MatrixXcd P(nodes.size(), k + 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = evaluate(nodes[i], k);
    for (int j = 0; j <= k; ++j) P(i, j) = p[j];
  }
  return P;
}

Eigen::MatrixXcd OPBasis::gram() const {
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(degree + 1, degree + 1);
  Eigen::VectorXcd p(degree + 1);
  for (std::size_t i = 0; i < measure->nodes.size(); ++i) {
    const auto v = evaluate(measure->nodes[i], degree);
    for (int j = 0; j <= degree; ++j) p[j] = v[j];
    G.noalias() += measure->weights[i] * (p.conjugate() * p.transpose());
  }
  return G;
}

double OPBasis::gram_error() const {
  const Eigen::MatrixXcd G = gram();
  double e = 0.0;
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; j <= degree; ++j) e = std::max(e, std::abs(G(i, j) - (i == j ? 1.0 : 0.0)));
  return e;
}

double interval_robin(double a, double b) {
  if (!(b > a)) throw InvalidInput("interval needs b > a");
  return std::log(4.0 / (b - a));
}

std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::regular: return "regular";
    case Regularity::irregular: return "irregular";
    case Regularity::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

RegularityVerdict regularity_rate(const OPBasis& basis, double target, double margin) {
  RegularityVerdict v;
  v.target = target;
  v.margin = margin;
  const int n = basis.degree;
  for (int k = 1; k <= n; ++k) {
    v.degrees.push_back(k);
    v.rates.push_back(basis.log_kappa[k] / k);
  }
  if (n < 20) {
    v.verdict = Regularity::inconclusive;
    return v;
  }
  const int k0 = static_cast<int>(std::ceil(0.75 * n));
  v.min_deviation = std::numeric_limits<double>::infinity();
  v.max_deviation = 0.0;
  for (int k = k0; k <= n; ++k) {
    const double d = std::abs(v.rates[k - 1] - target);
    v.min_deviation = std::min(v.min_deviation, d);
    v.max_deviation = std::max(v.max_deviation, d);
  }
  if (v.max_deviation <= margin) v.verdict = Regularity::regular;
  else if (v.min_deviation > 0.15) v.verdict = Regularity::irregular;
  else v.verdict = Regularity::inconclusive;
  return v;
}

double christoffel_function(const OPBasis& basis, int k, cplx z) {
  const auto p = basis.evaluate(z, k);
  double s = 0.0;
  for (const cplx& v : p) s += std::norm(v);
  return s / (k + 1);
}

GridMeasure christoffel_density(const OPBasis& basis, int k, GridPtr grid) {
  const SpectralMeasure& m = *basis.measure;
  const bool own = !grid || grid == m.grid;
  if (!grid) grid = m.grid;
  if (!grid) throw InvalidInput("spectral measure without a grid needs an evaluation grid");
  std::vector<double> w(grid->size(), 0.0);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    std::size_t c;
    if (own && !m.cell.empty()) {
      c = m.cell[i];
    } else {
      const Point x = grid->dim() == 1 ? Point{m.nodes[i].real()} : Point{m.nodes[i].real(), m.nodes[i].imag()};
      const auto loc = grid->locate(x);
      if (!loc) throw InvalidInput("quadrature node outside the evaluation grid");
      c = *loc;
    }
    w[c] += m.weights[i] * christoffel_function(basis, k, m.nodes[i]);
  }
  return GridMeasure(grid, std::move(w));
}

double determinantal_log_partition(const OPBasis& basis, int N) {
  if (N < 1) throw InvalidInput("N must be positive");
  if (N - 1 > basis.degree) {
    if (basis.numeric_loss) throw NumericLoss(*basis.numeric_loss);
    throw InvalidInput("N exceeds basis degree + 1");
  }
  double s = std::lgamma(N + 1.0);
  for (int j = 0; j < N; ++j) s -= 2.0 * basis.log_kappa[j];
  return s;
}

double determinantal_free_energy(const OPBasis& basis, int N) {
  if (N < 2) throw InvalidInput("N must be at least 2");
  return -determinantal_log_partition(basis, N) / (static_cast<double>(N) * (N - 1));
}

}  // namespace potlab
