#include "potlab/meanfield/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "potlab/core/errors.hpp"
#include "potlab/envelope/envelope.hpp"

namespace potlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double log_sum_exp(const std::vector<double>& v) {
  double mx = -kInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == -kInf) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// The fixed-beta problem on the carrier cells.
struct Problem {
  const InteractionOperator& op;
  std::vector<double> logmu0;
  std::vector<double> phi;
  double beta;
};

struct State {
  std::vector<double> u;   // log weights, normalized
  std::vector<double> w;
  std::vector<double> Aw;
  double F = 0.0;
  double res = 0.0;
  std::vector<double> G;   // u - log mu0 + beta (A w + phi) + log Z
};

void evaluate(const Problem& P, State& s) {
  const std::size_t n = s.u.size();
  const double lse = log_sum_exp(s.u);
  s.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.u[i] -= lse;
    s.w[i] = std::exp(s.u[i]);
  }
  P.op.apply(s.w, s.Aw);
  double quad = 0.0, lin = 0.0, ent = 0.0;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (s.w[i] > 0.0) {
      quad += s.w[i] * s.Aw[i];
      lin += s.w[i] * P.phi[i];
      ent += s.w[i] * (s.u[i] - P.logmu0[i]);
    }
    t[i] = P.logmu0[i] - P.beta * (s.Aw[i] + P.phi[i]);
  }
  s.F = 0.5 * quad + lin + ent / P.beta;
  const double logZ = log_sum_exp(t);
  s.G.resize(n);
  s.res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.G[i] = s.u[i] - t[i] + logZ;
    s.res = std::max(s.res, std::abs(s.G[i]));
  }
  if (!std::isfinite(s.F) || !std::isfinite(s.res)) throw NonFinite("mean-field iterate is not finite");
}

// Newton step in log weights. With S = diag(sqrt w) the linearized fixed point
// reads (I + beta S A S) y = -S G on {sum sqrt(w) y = 0}, solved by projected CG,
// and du = -G - beta A (S y).
std::vector<double> newton_direction(const Problem& P, const State& s) {
  const std::size_t n = s.u.size();
  std::vector<double> q(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = std::sqrt(s.w[i]);
    b[i] = -q[i] * s.G[i];
  }
  const double qq = dot(q, q);
  auto project = [&](std::vector<double>& v) {
    const double c = dot(q, v) / qq;
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * q[i];
  };
  std::vector<double> tmp(n), Atmp(n);
  auto applyB = [&](const std::vector<double>& y, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = q[i] * y[i];
    P.op.apply(tmp, Atmp);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + P.beta * q[i] * Atmp[i];
  };
  project(b);
  std::vector<double> y(n, 0.0), r = b, p = b, Bp(n);
  double rr = dot(r, r);
  const double stop = std::max(1e-28, 1e-12 * rr);
  for (int it = 0; it < 500 && rr > stop; ++it) {
    applyB(p, Bp);
    project(Bp);
    const double pBp = dot(p, Bp);
    if (!(pBp > 0.0)) break;
    const double a = rr / pBp;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += a * p[i];
      r[i] -= a * Bp[i];
    }
    const double rr_new = dot(r, r);
    const double bet = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + bet * p[i];
  }
  for (std::size_t i = 0; i < n; ++i) tmp[i] = q[i] * y[i];
  P.op.apply(tmp, Atmp);
  std::vector<double> du(n);
  for (std::size_t i = 0; i < n; ++i) du[i] = -s.G[i] - P.beta * Atmp[i];
  return du;
}

bool solve_fixed_beta(const Problem& P, State& s, const MeanFieldOptions& opts, int& iterations) {
  evaluate(P, s);
  if (opts.method == MeanFieldOptions::Method::damped) {
    double eta = opts.damping;
    for (int sweep = 0; sweep < opts.max_sweeps && s.res > opts.tol; ++sweep) {
      State t = s;
      for (std::size_t i = 0; i < s.u.size(); ++i) t.u[i] = s.u[i] - eta * s.G[i];
      evaluate(P, t);
      ++iterations;
      if (t.res > s.res) {
        eta *= 0.5;
        if (eta < 1e-12) return false;
      }
      s = std::move(t);
    }
    return s.res <= opts.tol;
  }
  for (int it = 0; it < opts.max_iter && s.res > opts.tol; ++it) {
    ++iterations;
    const std::vector<double> du = newton_direction(P, s);
    bool accepted = false;
    State best;
    double t = 1.0;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      State trial;
      trial.u = s.u;
      for (std::size_t i = 0; i < du.size(); ++i) trial.u[i] += t * du[i];
      evaluate(P, trial);
      const double slack = 1e-13 * (std::abs(s.F) + 1.0);
      if (trial.F <= s.F + slack || trial.res < 0.5 * s.res) {
        best = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) return false;
    s = std::move(best);
  }
  return s.res <= opts.tol;
}

GridPtr carrier_grid(const GridMeasure& mu0, std::vector<std::size_t>& idx) {
  idx.clear();
  for (std::size_t i = 0; i < mu0.size(); ++i)
    if (mu0.weight(i) > 0.0 && mu0.grid().cell(i).shape != CellShape::point) idx.push_back(i);
  if (idx.empty()) throw EmptyCarrier();
  if (idx.size() == mu0.size()) return mu0.grid_ptr();
  return share(mu0.grid().subset(idx));
}

}  // namespace

MeanFieldSolution solve_meanfield(const KernelConfig& cfg, const GridMeasure& mu0, const PotentialField& phi,
                                  double beta, const MeanFieldOptions& opts) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be positive and finite");
  if (!phi.grid->same_as(mu0.grid())) throw GridMismatch();
  std::vector<std::size_t> idx;
  const GridPtr carrier = carrier_grid(mu0, idx);
  auto op = interaction_for(cfg, carrier, opts.diag);
  const std::size_t n = idx.size();

  Problem P{*op, std::vector<double>(n), std::vector<double>(n), beta};
  const double m0 = mu0.total_mass();
  for (std::size_t k = 0; k < n; ++k) {
    P.logmu0[k] = std::log(mu0.weight(idx[k]) / m0);
    P.phi[k] = phi[idx[k]];
    if (!std::isfinite(P.phi[k])) throw InvalidInput("weight must be finite on the carrier");
  }

  State s;
  s.u = P.logmu0;
  double start = 0.0;
  if (!opts.init.empty()) {
    if (opts.init.size() != mu0.size()) throw GridMismatch();
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = opts.init[idx[k]];
      s.u[k] = v > 0.0 ? std::log(v) : P.logmu0[k] - 700.0;
      any = any || v > 0.0;
    }
    if (!any) s.u = P.logmu0;
    else start = opts.init_beta;
  }

  // Inverse temperatures beta 2^-j, j = J..0, starting at or below the anneal threshold.
  std::vector<double> path;
  const double floor_beta = std::max(opts.anneal_threshold, start);
  for (double b = beta; ; b *= 0.5) {
    path.push_back(b);
    if (b <= floor_beta) break;
  }
  std::reverse(path.begin(), path.end());

  int iterations = 0;
  std::vector<double> done;
  for (double b : path) {
    P.beta = b;
    if (!solve_fixed_beta(P, s, opts, iterations))
      throw SolverDiverged("mean-field iteration did not converge at beta " + std::to_string(b), s.res,
                           done.empty() ? 0.0 : done.back());
    done.push_back(b);
  }

  std::vector<double> w(mu0.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) w[idx[k]] = s.w[k];
  GridMeasure mu(mu0.grid_ptr(), std::move(w));
  GridMeasure mu0n = mu0.normalized();
  MeanFieldSolution sol{mu, potential_on(cfg, GridMeasure(carrier, s.w), mu0.grid_ptr(), opts.diag), beta, 0.0,
                        s.res, done, iterations};
  sol.free_energy = free_energy_functional(cfg, sol.measure, mu0n, phi, beta, opts.diag);
  return sol;
}

FreeEnergyCurve free_energy_scan(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                                 std::vector<double> T_grid, const GridPtr& S0, const MeanFieldOptions& opts) {
  for (double T : T_grid)
    if (!(T > 0.0)) throw InvalidInput("scan temperatures must be positive");
  std::sort(T_grid.begin(), T_grid.end(), std::greater<>());
  FreeEnergyCurve curve;
  const GridPtr S = S0 ? S0 : mu0.grid_ptr();
  curve.inf_energy = equilibrium_measure(cfg, S, PotentialField::tabulate(S, phi), opts.equilibrium).energy_value;

  const PotentialField field = PotentialField::tabulate(mu0.grid_ptr(), phi);
  MeanFieldOptions o = opts;
  std::vector<FreeEnergyPoint> pts;
  for (double T : T_grid) {
    FreeEnergyPoint pt{T, std::numeric_limits<double>::quiet_NaN(), false};
    try {
      MeanFieldSolution sol = solve_meanfield(cfg, mu0, field, 1.0 / T, o);
      pt.f = sol.free_energy;
      pt.converged = true;
      o.init = sol.measure.weights();
      o.init_beta = 1.0 / T;
    } catch (const SolverDiverged&) {
    }
    pts.push_back(pt);
  }
  curve.points.push_back(FreeEnergyPoint{0.0, curve.inf_energy, true});
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) curve.points.push_back(*it);
  curve.gap_at_zero = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 1; k < curve.points.size(); ++k)
    if (curve.points[k].converged) {
      curve.gap_at_zero = curve.points[k].f - curve.inf_energy;
      break;
    }
  return curve;
}

ZeroTemperatureGap zero_temperature_gap(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                                        double beta_max, const GridPtr& S0, const MeanFieldOptions& opts) {
  if (!(beta_max >= 4.0 * opts.anneal_threshold)) throw InvalidInput("beta_max must allow three anneal steps");
  ZeroTemperatureGap out;
  const GridPtr S = S0 ? S0 : mu0.grid_ptr();
  out.inf_energy = equilibrium_measure(cfg, S, PotentialField::tabulate(S, phi), opts.equilibrium).energy_value;
  const PotentialField field = PotentialField::tabulate(mu0.grid_ptr(), phi);
  MeanFieldOptions o = opts;
  for (double b : {beta_max / 4.0, beta_max / 2.0, beta_max}) {
    MeanFieldSolution sol = solve_meanfield(cfg, mu0, field, b, o);
    out.betas.push_back(b);
    out.f.push_back(sol.free_energy);
    o.init = sol.measure.weights();
    o.init_beta = b;
  }
  // f = f0 + a T + b T^2 through T, 2T, 4T.
  const double f0 = 8.0 / 3.0 * out.f[2] - 2.0 * out.f[1] + 1.0 / 3.0 * out.f[0];
  out.gap = f0 - out.inf_energy;
  out.raw_gap = out.f[2] - out.inf_energy;
  return out;
}

std::vector<PhaseRow> phase_scan(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi0,
                                 const WeightFunction& phi, const std::vector<double>& h_grid, double T,
                                 const MeanFieldOptions& opts) {
  if (!(T >= 0.0)) throw InvalidInput("temperature must be nonnegative");
  std::vector<PhaseRow> rows;
  std::vector<std::size_t> idx;
  const GridPtr carrier = carrier_grid(mu0, idx);
  const PotentialField f0 = PotentialField::tabulate(T == 0.0 ? carrier : mu0.grid_ptr(), phi0);
  const PotentialField f1 = PotentialField::tabulate(T == 0.0 ? carrier : mu0.grid_ptr(), phi);
  MeanFieldOptions o = opts;
  EquilibriumOptions eo = opts.equilibrium;
  for (double h : h_grid) {
    PhaseRow row{h, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN(), false};
    const PotentialField ph = f0 + f1.scaled(h);
    try {
      if (T == 0.0) {
        EquilibriumSolution sol = equilibrium_measure(cfg, carrier, ph, eo);
        row.f = sol.energy_value;
        row.dfdh = dot(sol.measure.weights(), f1.values);
        eo.init = sol.measure.weights();
      } else {
        MeanFieldSolution sol = solve_meanfield(cfg, mu0, ph, 1.0 / T, o);
        row.f = sol.free_energy;
        row.dfdh = dot(sol.measure.weights(), f1.values);
        o.init = sol.measure.weights();
        o.init_beta = 1.0 / T;
      }
      row.converged = true;
    } catch (const SolverDiverged&) {
      row.f = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  for (std::size_t k = 1; k + 1 < rows.size(); ++k)
    rows[k].central = (rows[k + 1].f - rows[k - 1].f) / (rows[k + 1].h - rows[k - 1].h);
  return rows;
}

WeightedCounterexample counterexample_weighted(const KernelConfig& cfg, const GridPtr& K, const WeightFunction& phi0,
                                               double t, int circle_cells, const EquilibriumOptions& opts) {
  if (!(t >= 0.0)) throw InvalidInput("t must be nonnegative");
  WeightedCounterexample out;
  out.t = t;
  // The circle is Lebesgue-null, so measures absolutely continuous wrt mu0 never see -t.
  out.constrained = equilibrium_measure(cfg, K, PotentialField::tabulate(K, phi0), opts).energy_value;

  const GridPtr circle = share(GridSet::circle(Point{0.0, 0.0}, 1.0, circle_cells));
  const GridMeasure nu = GridMeasure::lebesgue(circle);
  out.witness = weighted_energy(cfg, nu, PotentialField::tabulate(circle, phi0), opts.diag) - t;

  const GridPtr both = share(K->unite(*circle));
  std::vector<double> v(both->size());
  for (std::size_t i = 0; i < both->size(); ++i) {
    const Point& x = both->cell(i).center;
    v[i] = phi0(x) - (i >= K->size() ? t : 0.0);
  }
  out.overlay_inf = equilibrium_measure(cfg, both, PotentialField(both, std::move(v)), opts).energy_value;
  out.gap = out.constrained - out.overlay_inf;
  return out;
}

}  // namespace potlab
