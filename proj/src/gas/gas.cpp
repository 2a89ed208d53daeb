#include "potlab/gas/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "potlab/core/errors.hpp"

namespace potlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Two unit vectors orthogonal to n (a unit vector of R^3).
void tangents(const Point& n, Point& a, Point& b) {
  Point e = std::abs(n[0]) < 0.9 ? Point{1.0, 0.0, 0.0} : Point{0.0, 1.0, 0.0};
  const double d = e[0] * n[0] + e[1] * n[1] + e[2] * n[2];
  a = e - d * n;
  a = (1.0 / a.norm()) * a;
  b = Point{n[1] * a[2] - n[2] * a[1], n[2] * a[0] - n[0] * a[2], n[0] * a[1] - n[1] * a[0]};
}

Point sample_in_cell(const Cell& c, std::mt19937_64& rng) {
  Point p = c.center;
  const int k = c.center.dim;
  switch (c.shape) {
    case CellShape::point:
      return p;
    case CellShape::cube:
      for (int i = 0; i < k; ++i) p[i] += (uniform01(rng) - 0.5) * c.size;
      return p;
    case CellShape::segment:
      return p + ((uniform01(rng) - 0.5) * c.size) * c.axis;
    case CellShape::patch: {
      Point a, b;
      tangents(c.axis, a, b);
      const double R = c.radius();
      const double r = R * std::sqrt(uniform01(rng));
      const double t = 2.0 * std::numbers::pi * uniform01(rng);
      return p + (r * std::cos(t)) * a + (r * std::sin(t)) * b;
    }
    case CellShape::ball: {
      for (;;) {
        Point q = Point::zero(k);
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
          q[i] = 2.0 * uniform01(rng) - 1.0;
          s += q[i] * q[i];
        }
        if (s <= 1.0) {
          for (int i = 0; i < k; ++i) p[i] += c.size * q[i];
          return p;
        }
      }
    }
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------

PairInteraction PairInteraction::riesz(const KernelConfig& cfg) {
  PairInteraction w;
  w.kind_ = Kind::riesz;
  w.singular_ = true;
  w.W_ = [cfg](const Point& x, const Point& y) { return kernel_eval(cfg, x, y); };
  return w;
}

PairInteraction PairInteraction::separable(std::function<double(const Point&)> V) {
  PairInteraction w;
  w.kind_ = Kind::separable_V;
  w.singular_ = false;
  w.V_ = std::move(V);
  return w;
}

PairInteraction PairInteraction::custom(std::function<double(const Point&, const Point&)> W, bool singular) {
  PairInteraction w;
  w.kind_ = Kind::custom;
  w.singular_ = singular;
  w.W_ = std::move(W);
  return w;
}

double PairInteraction::operator()(const Point& x, const Point& y) const {
  if (kind_ == Kind::separable_V) return V_(x) + V_(y);
  if (singular_ && x == y) throw CoincidentPoints();
  return W_(x, y);
}

double PairInteraction::single(const Point& x) const {
  if (kind_ != Kind::separable_V) throw Unsupported("interaction is not separable");
  return V_(x);
}

double hamiltonian(const PairInteraction& W, const std::vector<Point>& x, const WeightFunction& phi) {
  const std::size_t N = x.size();
  if (N < 2) throw InvalidInput("a gas needs at least two particles");
  double pair = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) pair += W(x[i], x[j]);
    if (phi) lin += phi(x[i]);
  }
  return pair / static_cast<double>(N - 1) + lin;
}

// ---------------------------------------------------------------------------

ReferenceMeasure::ReferenceMeasure(const GridMeasure& mu0) : grid_(mu0.grid_ptr()) {
  const double total = mu0.total_mass();
  if (!(total > 0.0)) throw InvalidInput("reference measure has no mass");
  dim_ = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    const Cell& c = mu0.grid().cell(i);
    const double w = mu0.weight(i) / total;
    const double v = c.volume();
    pieces_.push_back(Piece{c, v > 0.0 ? w / v : (w > 0.0 ? kInf : 0.0)});
    acc += w;
    cumulative_.push_back(acc);
    dim_ = std::max(dim_, c.center.dim);
  }
}

ReferenceMeasure::ReferenceMeasure(const BallUnionMeasure& mu0) {
  dim_ = mu0.dim();
  double mx = -kInf;
  for (const BallComponent& b : mu0.components()) mx = std::max(mx, b.log_weight);
  double acc = 0.0;
  std::vector<double> w;
  for (const BallComponent& b : mu0.components()) w.push_back(std::exp(b.log_weight - mx));
  double total = 0.0;
  for (double x : w) total += x;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const BallComponent& b = mu0.components()[k];
    Cell c{b.center, CellShape::ball, b.radius, Point{}};
    pieces_.push_back(Piece{c, b.weight / c.volume()});
    acc += w[k] / total;
    cumulative_.push_back(acc);
  }
}

Point ReferenceMeasure::sample(std::mt19937_64& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t k = std::min<std::size_t>(it - cumulative_.begin(), pieces_.size() - 1);
  while (k > 0 && cumulative_[k] == cumulative_[k - 1]) --k;
  return sample_in_cell(pieces_[k].cell, rng);
}

double ReferenceMeasure::density(const Point& x) const {
  if (grid_) {
    auto i = grid_->locate(x);
    return i ? pieces_[*i].density : 0.0;
  }
  double d = 0.0;
  for (const Piece& p : pieces_)
    if (distance(p.cell.center, x) <= p.cell.size) d += p.density;
  return d;
}

// ---------------------------------------------------------------------------

namespace {

// Batch-means standard error of the mean of a correlated series.
double batch_se(const std::vector<double>& h) {
  const std::size_t nb = 20;
  if (h.size() < 2 * nb) {
    if (h.size() < 2) return 0.0;
    double m = 0.0, v = 0.0;
    for (double x : h) m += x;
    m /= double(h.size());
    for (double x : h) v += (x - m) * (x - m);
    return std::sqrt(v / double(h.size() - 1) / double(h.size()));
  }
  const std::size_t len = h.size() / nb;
  std::vector<double> means(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < len; ++k) means[b] += h[b * len + k];
    means[b] /= double(len);
  }
  double m = 0.0, v = 0.0;
  for (double x : means) m += x;
  m /= double(nb);
  for (double x : means) v += (x - m) * (x - m);
  return std::sqrt(v / double(nb - 1) / double(nb));
}

}  // namespace

GibbsResult sample_gibbs(const PairInteraction& W, const ReferenceMeasure& mu0, const WeightFunction& phi,
                         const GasConfig& gas, const SweepObserver& observer) {
  if (gas.N < 2) throw InvalidInput("N must be at least 2");
  if (gas.chains < 1) throw InvalidInput("need at least one chain");
  if (!(gas.proposal_scale > 0.0)) throw InvalidInput("proposal scale must be positive");
  if (!(gas.beta_N >= 0.0)) throw InvalidInput("beta_N must be nonnegative");
  const int N = gas.N;
  const int burn = gas.burn_in >= 0 ? gas.burn_in : gas.sweeps / 5;
  const double scale = 1.0 / double(N - 1);
  auto phi_at = [&](const Point& x) { return phi ? phi(x) : 0.0; };

  GibbsResult out;
  double acc_total = 0.0, tries_total = 0.0;
  for (int c = 0; c < gas.chains; ++c) {
    std::mt19937_64 rng(gas.seed + static_cast<std::uint64_t>(c));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Point> x(N);
    for (int i = 0; i < N; ++i) x[i] = mu0.sample(rng);
    double H = 0.0;
    for (;;) {
      try {
        H = hamiltonian(W, x, phi);
        break;
      } catch (const CoincidentPoints&) {
        x[0] = mu0.sample(rng);
      }
    }
    std::vector<double> Hs;
    double accepted = 0.0, tries = 0.0;
    for (int sweep = 0; sweep < gas.sweeps + burn; ++sweep) {
      for (int m = 0; m < N; ++m) {
        const int i = static_cast<int>(uniform01(rng) * N) % N;
        const bool local = uniform01(rng) < gas.local_fraction;
        Point y;
        double ratio = 1.0;
        if (local) {
          y = x[i];
          for (int a = 0; a < mu0.dim(); ++a) y[a] += gas.proposal_scale * gauss(rng);
          const double dy = mu0.density(y);
          if (sweep >= burn) tries += 1.0;
          if (dy == 0.0) continue;
          const double dx = mu0.density(x[i]);
          ratio = dy == kInf ? (dx == kInf ? 1.0 : 0.0) : dy / dx;
          if (ratio == 0.0) continue;
        } else {
          y = mu0.sample(rng);
          if (sweep >= burn) tries += 1.0;
        }
        bool clash = false;
        double dH = phi_at(y) - phi_at(x[i]);
        double dpair = 0.0;
        for (int j = 0; j < N && !clash; ++j) {
          if (j == i) continue;
          if (W.singular() && y == x[j]) {
            clash = true;
            break;
          }
          dpair += W(y, x[j]) - W(x[i], x[j]);
        }
        if (clash) continue;
        dH += scale * dpair;
        const double logr = std::log(ratio) - gas.beta_N * dH;
        if (logr >= 0.0 || std::log(uniform01(rng)) < logr) {
          x[i] = y;
          H += dH;
          if (sweep >= burn) accepted += 1.0;
        }
      }
      if (sweep >= burn) {
        if (sweep % 64 == 0) H = hamiltonian(W, x, phi);
        Hs.push_back(H);
        if (observer) observer(c, x);
        const int s = sweep - burn;
        if (gas.thin > 0 && s % gas.thin == 0)
          out.samples.push_back(SampleRecord{c, s, ParticleConfig{x, hamiltonian(W, x, phi)}});
      }
    }
    ChainSummary cs;
    for (double h : Hs) cs.mean_H += h;
    cs.mean_H = Hs.empty() ? H : cs.mean_H / double(Hs.size());
    cs.se_H = batch_se(Hs);
    cs.acceptance = tries > 0.0 ? accepted / tries : 0.0;
    out.chains.push_back(cs);
    acc_total += accepted;
    tries_total += tries;
  }
  double v = 0.0;
  for (const ChainSummary& cs : out.chains) {
    out.mean_H += cs.mean_H;
    v += cs.se_H * cs.se_H;
  }
  const double k = double(out.chains.size());
  out.mean_H /= k;
  out.se_H = std::sqrt(v) / k;
  out.acceptance = tries_total > 0.0 ? acc_total / tries_total : 0.0;
  if (gas.sweeps > 0 && out.acceptance < 1e-4) throw ZeroAcceptance(out.acceptance);
  return out;
}

GridMeasure empirical_expectation(const std::vector<SampleRecord>& samples, const GridPtr& grid) {
  if (samples.empty()) throw InvalidInput("no samples");
  std::vector<double> w(grid->size(), 0.0);
  double total = 0.0;
  for (const SampleRecord& s : samples)
    for (const Point& p : s.config.positions) {
      auto i = grid->locate(p);
      if (!i) continue;
      w[*i] += 1.0;
      total += 1.0;
    }
  if (total == 0.0) throw InvalidInput("no sample falls in the grid");
  for (double& x : w) x /= total;
  return GridMeasure(grid, std::move(w));
}

FeketeResult fekete_points(const PairInteraction& W, const GridPtr& S, const WeightFunction& phi, int N,
                           int restarts, std::uint64_t seed) {
  if (N < 2) throw InvalidInput("N must be at least 2");
  const std::vector<Point> cand = S->nodes();
  if (cand.size() < static_cast<std::size_t>(N)) throw InvalidInput("fewer candidate nodes than particles");
  std::vector<double> phic(cand.size(), 0.0);
  if (phi)
    for (std::size_t k = 0; k < cand.size(); ++k) phic[k] = phi(cand[k]);
  std::mt19937_64 rng(seed);
  FeketeResult best;
  best.F = kInf;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    std::vector<std::size_t> pos;
    std::vector<char> used(cand.size(), 0);
    while (pos.size() < static_cast<std::size_t>(N)) {
      const std::size_t k = static_cast<std::size_t>(uniform01(rng) * double(cand.size())) % cand.size();
      if (used[k]) continue;
      used[k] = 1;
      pos.push_back(k);
    }
    // Pair sums against the current configuration: field[k] = sum_j W(c_k, x_j).
    std::vector<double> field(cand.size(), 0.0);
    auto add = [&](std::size_t j, double sgn) {
      for (std::size_t k = 0; k < cand.size(); ++k) {
        if (k == j && W.singular()) continue;
        field[k] += sgn * W(cand[k], cand[j]);
      }
    };
    for (std::size_t j : pos) add(j, 1.0);
    for (int sweep = 0; sweep < 200; ++sweep) {
      bool moved = false;
      for (int i = 0; i < N; ++i) {
        const std::size_t cur = pos[i];
        add(cur, -1.0);
        used[cur] = 0;
        std::size_t arg = cur;
        double val = field[cur] / double(N - 1) + phic[cur];
        for (std::size_t k = 0; k < cand.size(); ++k) {
          if (used[k] && W.singular()) continue;
          const double v = field[k] / double(N - 1) + phic[k];
          if (v < val - 1e-14 * (1.0 + std::abs(val))) {
            val = v;
            arg = k;
          }
        }
        pos[i] = arg;
        used[arg] = 1;
        add(arg, 1.0);
        if (arg != cur) moved = true;
      }
      if (!moved) break;
    }
    std::vector<Point> x;
    for (std::size_t k : pos) x.push_back(cand[k]);
    const double H = hamiltonian(W, x, phi);
    if (H / N < best.F) {
      best.F = H / N;
      best.config = ParticleConfig{x, H};
    }
  }
  return best;
}

std::vector<TIRow> free_energy_ti(const PairInteraction& W, const ReferenceMeasure& mu0, const WeightFunction& phi,
                                  const GasConfig& gas, const std::vector<double>& beta_grid) {
  if (beta_grid.empty() || beta_grid.front() != 0.0) throw InvalidInput("the beta grid must start at 0");
  for (std::size_t k = 1; k < beta_grid.size(); ++k)
    if (!(beta_grid[k] > beta_grid[k - 1])) throw InvalidInput("the beta grid must increase");
  std::vector<TIRow> rows;
  for (double b : beta_grid) {
    GasConfig g = gas;
    g.beta_N = b;
    g.thin = 0;
    const GibbsResult r = sample_gibbs(W, mu0, phi, g);
    rows.push_back(TIRow{b, r.mean_H, r.se_H, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN()});
  }
  // Trapezoid weights: each <H>_k enters log Z(beta_K) with weight (db_{k} + db_{k+1})/2.
  for (std::size_t K = 1; K < rows.size(); ++K) {
    double logZ = 0.0, var = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
      double wk = 0.0;
      if (k > 0) wk += 0.5 * (rows[k].beta - rows[k - 1].beta);
      if (k < K) wk += 0.5 * (rows[k + 1].beta - rows[k].beta);
      logZ -= wk * rows[k].mean_H;
      var += wk * wk * rows[k].se_H * rows[k].se_H;
    }
    rows[K].logZ = logZ;
    rows[K].se = std::sqrt(var);
    rows[K].F_N = -logZ / (rows[K].beta * gas.N);
  }
  return rows;
}

}  // namespace potlab
