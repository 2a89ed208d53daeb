#include "potlab/envelope/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "potlab/core/errors.hpp"

namespace potlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Problem {
  const InteractionOperator& op;
  const std::vector<double>& phi;
  std::vector<char> free;  // cells allowed to carry mass
  std::size_t n_free = 0;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Stationarity residual: spread of the gradient on the numerical support plus
// the largest amount by which any admissible cell undercuts its minimum.
double residual(const Problem& P, const std::vector<double>& w, const std::vector<double>& g, double atom_threshold) {
  const double thr = atom_threshold / static_cast<double>(P.n_free);
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!P.free[i] || w[i] <= thr) continue;
    lo = std::min(lo, g[i]);
    hi = std::max(hi, g[i]);
  }
  double r = hi - lo;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (P.free[i]) r = std::max(r, lo - g[i]);
  return r;
}

void gradient(const Problem& P, const std::vector<double>& Aw, std::vector<double>& g) {
  g.resize(Aw.size());
  for (std::size_t i = 0; i < Aw.size(); ++i) g[i] = Aw[i] + P.phi[i];
}

// Projected conjugate gradients for A w + phi = const on the cells flagged in S,
// with the mass fixed at one. w and Aw are updated in place.
bool solve_on_support(const Problem& P, const std::vector<char>& S, std::vector<double>& w, std::vector<double>& Aw,
                      double ctol) {
  const std::size_t n = w.size();
  std::size_t m = 0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (S[i]) {
      ++m;
      w[i] = std::max(w[i], 0.0);
      mass += w[i];
    } else {
      w[i] = 0.0;
    }
  }
  if (m == 0) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (S[i]) w[i] = mass > 0.0 ? w[i] / mass : 1.0 / static_cast<double>(m);
  P.op.apply(w, Aw);

  auto project = [&](std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (S[i]) s += v[i];
    s /= static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i) v[i] = S[i] ? v[i] - s : 0.0;
  };
  auto sup = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (S[i]) s = std::max(s, std::abs(v[i]));
    return s;
  };

  std::vector<double> r(n), p(n), Ap(n), q(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = -(Aw[i] + P.phi[i]);
  project(r);
  p = r;
  double rr = dot(r, r);
  const int max_cg = 2000;
  for (int it = 0; it < max_cg; ++it) {
    if (sup(r) <= ctol) return true;
    P.op.apply(p, Ap);
    q = Ap;
    project(q);
    const double pAp = dot(p, q);
    if (!(pAp > 0.0)) return false;
    const double a = rr / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      if (S[i]) w[i] += a * p[i];
      Aw[i] += a * Ap[i];
    }
    if ((it + 1) % 50 == 0) {
      P.op.apply(w, Aw);
      for (std::size_t i = 0; i < n; ++i) r[i] = -(Aw[i] + P.phi[i]);
      project(r);
    } else {
      for (std::size_t i = 0; i < n; ++i) r[i] -= a * q[i];
    }
    const double rr_new = dot(r, r);
    const double b = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = S[i] ? r[i] + b * p[i] : 0.0;
  }
  return sup(r) <= ctol;
}

// Active-set refinement: alternately solve the Euler-Lagrange system on a
// candidate support, drop cells that come out negative and admit cells whose
// gradient undercuts the support value.
bool polish(const Problem& P, std::vector<double>& w, std::vector<double>& Aw, double tol) {
  const std::size_t n = w.size();
  const double keep = 1e-4 / static_cast<double>(P.n_free);
  std::vector<char> S(n, 0);
  for (std::size_t i = 0; i < n; ++i) S[i] = P.free[i] && w[i] > keep;
  std::vector<double> trial = w, Atrial = Aw, g;
  for (int outer = 0; outer < 100; ++outer) {
    if (!solve_on_support(P, S, trial, Atrial, 0.05 * tol)) return false;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (S[i] && trial[i] < 0.0) {
        S[i] = 0;
        trial[i] = 0.0;
        changed = true;
      }
    }
    if (changed) continue;
    gradient(P, Atrial, g);
    double lam = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (S[i]) {
        lam += trial[i] * g[i];
        mass += trial[i];
      }
    lam /= mass;
    for (std::size_t i = 0; i < n; ++i) {
      if (P.free[i] && !S[i] && g[i] < lam - 0.5 * tol) {
        S[i] = 1;
        changed = true;
      }
    }
    if (!changed) {
      w = trial;
      Aw = Atrial;
      return true;
    }
  }
  return false;
}

}  // namespace

double weighted_median(const std::vector<double>& values, const std::vector<double>& weights) {
  std::vector<std::size_t> idx;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (weights[i] > 0.0) {
      idx.push_back(i);
      total += weights[i];
    }
  if (idx.empty()) throw InvalidInput("weighted median of an empty set");
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double acc = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    acc += weights[idx[k]];
    if (acc >= 0.5 * total) return values[idx[k]];
  }
  return values[idx.back()];
}

EquilibriumSolution equilibrium_measure(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phi,
                                        const EquilibriumOptions& opts) {
  if (!S || S->size() == 0) throw InvalidInput("empty set");
  if (!phi.grid->same_as(*S)) throw GridMismatch();
  auto op = interaction_for(cfg, S, opts.diag);
  const std::size_t n = S->size();

  Problem P{*op, phi.values, std::vector<char>(n, 0), 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(phi[i]) || phi[i] == -kInf) throw InvalidInput("weight must be finite on S");
    P.free[i] = !op->polar(i) && phi[i] < kInf;
    P.n_free += P.free[i];
  }
  if (P.n_free == 0) throw InvalidInput("no cell of S can carry mass");

  std::vector<double> w(n, 0.0);
  if (!opts.init.empty()) {
    if (opts.init.size() != n) throw GridMismatch();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (P.free[i]) s += std::max(0.0, opts.init[i]);
    if (s > 0.0)
      for (std::size_t i = 0; i < n; ++i) w[i] = P.free[i] ? std::max(0.0, opts.init[i]) / s : 0.0;
  }
  if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0)
    for (std::size_t i = 0; i < n; ++i) w[i] = P.free[i] ? 1.0 / static_cast<double>(P.n_free) : 0.0;

  std::vector<double> Aw = op->apply(w), g;
  gradient(P, Aw, g);
  double res = residual(P, w, g, opts.atom_threshold);

  // Mirror descent in log weights. Zero warm-start entries restart from a floor.
  const double floor_w = 1e-30 / static_cast<double>(P.n_free);
  std::vector<double> logw(n, -kInf);
  for (std::size_t i = 0; i < n; ++i)
    if (P.free[i]) logw[i] = std::log(std::max(w[i], floor_w));

  double spread = 0.0;
  {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < n; ++i)
      if (P.free[i]) {
        lo = std::min(lo, g[i]);
        hi = std::max(hi, g[i]);
      }
    spread = hi - lo;
  }
  double eta = spread > 0.0 ? 1.0 / spread : 1.0;
  std::vector<double> logw_new(n), w_new(n), d(n), Ad(n);
  int it = 0;
  int since_polish = 0;
  const int polish_every = 150;
  while (res > opts.tol && it < opts.max_iter) {
    if (opts.polish && since_polish >= polish_every) {
      since_polish = 0;
      std::vector<double> pw = w, pAw = Aw;
      if (polish(P, pw, pAw, opts.tol)) {
        std::vector<double> pg;
        gradient(P, pAw, pg);
        const double pres = residual(P, pw, pg, opts.atom_threshold);
        if (pres < res) {
          w = pw;
          Aw = pAw;
          g = pg;
          res = pres;
          for (std::size_t i = 0; i < n; ++i)
            if (P.free[i]) logw[i] = std::log(std::max(w[i], floor_w));
          if (res <= opts.tol) break;
        }
      }
    }
    ++it;
    ++since_polish;
    double gmin = kInf;
    for (std::size_t i = 0; i < n; ++i)
      if (P.free[i]) gmin = std::min(gmin, g[i]);
    bool accepted = false;
    for (int bt = 0; bt < 60 && !accepted; ++bt) {
      double mx = -kInf;
      for (std::size_t i = 0; i < n; ++i) {
        logw_new[i] = P.free[i] ? logw[i] - eta * (g[i] - gmin) : -kInf;
        mx = std::max(mx, logw_new[i]);
      }
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (P.free[i]) s += std::exp(logw_new[i] - mx);
      const double lse = mx + std::log(s);
      double kl = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!P.free[i]) {
          w_new[i] = 0.0;
          d[i] = 0.0;
          continue;
        }
        logw_new[i] -= lse;
        w_new[i] = std::exp(logw_new[i]);
        d[i] = w_new[i] - w[i];
        if (w_new[i] > 0.0) kl += w_new[i] * (logw_new[i] - logw[i]);
      }
      op->apply(d, Ad);
      const double quad = 0.5 * dot(d, Ad);
      if (quad <= kl / eta + 1e-15 * std::abs(kl / eta)) {
        accepted = true;
        logw.swap(logw_new);
        w.swap(w_new);
        for (std::size_t i = 0; i < n; ++i) Aw[i] += Ad[i];
        eta *= 1.5;
      } else {
        eta *= 0.5;
      }
    }
    if (!accepted) break;
    if (it % 100 == 0) op->apply(w, Aw);
    gradient(P, Aw, g);
    res = residual(P, w, g, opts.atom_threshold);
  }
  if (res > opts.tol && opts.polish) {
    std::vector<double> pw = w, pAw = Aw;
    if (polish(P, pw, pAw, opts.tol)) {
      std::vector<double> pg;
      gradient(P, pAw, pg);
      const double pres = residual(P, pw, pg, opts.atom_threshold);
      if (pres < res) {
        w = pw;
        Aw = pAw;
        g = pg;
        res = pres;
      }
    }
  }
  if (res > opts.tol) throw SolverDiverged("equilibrium solver did not reach stationarity", res);

  // Clean round-off negatives and renormalize.
  double s = 0.0;
  for (double& x : w) {
    x = std::max(x, 0.0);
    s += x;
  }
  for (double& x : w) x /= s;
  GridMeasure mu(S, w);
  PotentialField psi = potential(cfg, mu, opts.diag);
  EquilibriumSolution sol{mu, psi, 0.0, 0.0, it, res};
  const double thr = opts.atom_threshold / static_cast<double>(P.n_free);
  std::vector<double> diff(n), sw(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = psi[i] - phi[i];
    if (w[i] > thr) sw[i] = w[i];
  }
  sol.frostman_constant = weighted_median(diff, sw);
  sol.energy_value = weighted_energy(cfg, mu, phi, opts.diag);
  return sol;
}

namespace {

FrostmanReport frostman_from(const GridMeasure& mu, const PotentialField& psi, const PotentialField& phi, double tol,
                             double atom_threshold) {
  const std::size_t n = mu.size();
  std::size_t n_free = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mu.grid().cell(i).shape != CellShape::point) ++n_free;
  const double thr = atom_threshold / static_cast<double>(std::max<std::size_t>(n_free, 1));
  std::vector<double> diff(n), sw(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = psi[i] - phi[i];
    if (mu.weight(i) > thr) sw[i] = mu.weight(i);
  }
  FrostmanReport rep;
  rep.constant = weighted_median(diff, sw);
  double worst = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (phi[i] == kInf) continue;
    const double v = diff[i] - rep.constant;
    rep.max_upper = std::max(rep.max_upper, v);
    if (sw[i] > 0.0) rep.max_support_dev = std::max(rep.max_support_dev, std::abs(v));
    const double viol = std::max(v, sw[i] > 0.0 ? std::abs(v) : -kInf);
    if (viol > worst) {
      worst = viol;
      rep.worst_cell = i;
    }
  }
  rep.verdict = rep.max_upper <= tol && rep.max_support_dev <= tol;
  return rep;
}

}  // namespace

FrostmanReport frostman_check(const EquilibriumSolution& sol, const PotentialField& phi, double tol,
                              double atom_threshold) {
  if (!phi.grid->same_as(sol.measure.grid())) throw GridMismatch();
  return frostman_from(sol.measure, sol.potential, phi, tol, atom_threshold);
}

FrostmanReport frostman_check(const KernelConfig& cfg, const GridMeasure& mu, const PotentialField& phi, double tol,
                              const DiagonalRule& diag, double atom_threshold) {
  if (!phi.grid->same_as(mu.grid())) throw GridMismatch();
  return frostman_from(mu, potential(cfg, mu, diag), phi, tol, atom_threshold);
}

}  // namespace potlab
