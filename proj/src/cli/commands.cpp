#include "potlab/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "toml.hpp"

#include "potlab/cli/weight_expr.hpp"
#include "potlab/core/errors.hpp"
#include "potlab/core/io.hpp"
#include "potlab/diagnostics/diagnostics.hpp"
#include "potlab/gas/gas.hpp"
#include "potlab/meanfield/meanfield.hpp"
#include "potlab/orthopoly/orthopoly.hpp"

namespace potlab {

namespace {

using nlohmann::json;

/// JSON has no infinities; they are spelled out, NaN becomes null.
json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json point_json(const Point& p) {
  json a = json::array();
  for (int i = 0; i < std::max(1, p.dim); ++i) a.push_back(p[i]);
  return a;
}

/// Rows of a CSV table with a header line.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : cols_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) out_ += (i ? "," : "") + columns[i];
    out_ += "\n";
  }
  void row(const std::vector<double>& v) {
    if (v.size() != cols_) throw Error("table row width");
    for (std::size_t i = 0; i < v.size(); ++i) out_ += (i ? "," : "") + format_number(v[i]);
    out_ += "\n";
  }
  const std::string& str() const { return out_; }

 private:
  std::size_t cols_;
  std::string out_;
};

struct Context {
  ExperimentConfig& cfg;
  CommandResult result;
  KernelConfig kernel;

  explicit Context(ExperimentConfig& c) : cfg(c), kernel(c.kernel()) {}

  EquilibriumOptions equilibrium() const {
    EquilibriumOptions o;
    o.tol = cfg.solver_tol();
    o.max_iter = cfg.solver_max_iter();
    return o;
  }
  MeanFieldOptions meanfield() const {
    MeanFieldOptions o;
    o.anneal_threshold = cfg.solver_anneal();
    o.equilibrium = equilibrium();
    return o;
  }
  void csv(const std::string& name, std::string content) {
    if (cfg.wants("csv")) result.artifacts.push_back({name, std::move(content)});
  }
  void json_file(const std::string& name, const json& j) {
    if (cfg.wants("json")) result.artifacts.push_back({name, j.dump(2) + "\n"});
  }
  json& report() { return result.report; }
};

double interval_a(const ExperimentConfig& c) { return c.tree["domain"].value("a", -1.0); }
double interval_b(const ExperimentConfig& c) { return c.tree["domain"].value("b", 1.0); }

/// Reference measure mu0 named by run.mu0 (or the ball-union domain itself).
struct Reference {
  GridMeasure grid;
  std::optional<BallUnionMeasure> balls;
  std::string label;
};

GridMeasure arcsine_cells(const GridPtr& S, double a, double b) {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  auto F = [&](double x) { return std::asin(std::clamp((x - c) / r, -1.0, 1.0)) / std::numbers::pi; };
  return GridMeasure::from_masses(S, [&](const Cell& cell) {
    return F(cell.center[0] + 0.5 * cell.size) - F(cell.center[0] - 0.5 * cell.size);
  });
}

Reference reference(Context& ctx, const GridPtr& S) {
  if (auto balls = ctx.cfg.ball_union()) return {balls->as_grid_measure(), balls, "ball union file"};
  const std::string name = ctx.cfg.run_string("mu0", "lebesgue");
  if (name == "lebesgue") return {GridMeasure::lebesgue(S), std::nullopt, name};
  if (name == "equilibrium") {
    const auto sol = equilibrium_measure(ctx.kernel, S, PotentialField::constant(S, 0.0), ctx.equilibrium());
    return {sol.measure, std::nullopt, name};
  }
  if (name == "arcsine") {
    if (ctx.cfg.domain_kind() != "interval") throw InvalidInput("run.mu0 = arcsine needs an interval domain");
    return {arcsine_cells(S, interval_a(ctx.cfg), interval_b(ctx.cfg)), std::nullopt, name};
  }
  return {read_measure_csv(name, S), std::nullopt, name};
}

std::pair<double, double> support_range(const GridMeasure& mu, double threshold) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i : mu.support(threshold)) {
    lo = std::min(lo, mu.grid().cell(i).center[0]);
    hi = std::max(hi, mu.grid().cell(i).center[0]);
  }
  return {lo, hi};
}

json frostman_json(const FrostmanReport& f) {
  return {{"constant", num(f.constant)},
          {"max_upper", num(f.max_upper)},
          {"max_support_dev", num(f.max_support_dev)},
          {"verdict", f.verdict}};
}

// ---------------------------------------------------------------- commands

void cmd_equilibrium(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const PotentialField phi = PotentialField::tabulate(S, ctx.cfg.weight());
  const EquilibriumSolution sol = equilibrium_measure(ctx.kernel, S, phi, ctx.equilibrium());
  const FrostmanReport fr = frostman_check(sol, phi, ctx.cfg.run_double("frostman_tol", 5e-3));
  ctx.csv("eq.csv", measure_csv(sol.measure));
  ctx.csv("potential.csv", field_csv(sol.potential));
  json& r = ctx.report();
  r["cells"] = S->size();
  r["energy"] = num(sol.energy_value);
  r["frostman_constant"] = num(sol.frostman_constant);
  r["iterations"] = sol.iterations;
  r["residual"] = num(sol.residual);
  r["frostman"] = frostman_json(fr);
  r["support_cells"] = sol.measure.support(1e-8 / S->size()).size();
  if (S->dim() == 1) {
    const auto [lo, hi] = support_range(sol.measure, 1e-8 / S->size());
    r["support"] = {num(lo), num(hi)};
  }
}

void cmd_envelope(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const WeightFunction w = ctx.cfg.weight();
  const std::string mode = ctx.cfg.run_string("mode", "set");
  json& r = ctx.report();
  std::optional<EnvelopeField> env;
  if (mode == "set") {
    const PotentialField phi = PotentialField::tabulate(S, w);
    const RegularityReport reg =
        regularity_check(ctx.kernel, S, phi, ctx.cfg.run_double("regularity_tol", 5e-3), ctx.equilibrium());
    env = reg.envelope;
    r["max_violation"] = num(reg.max_violation);
    r["regular"] = reg.regular;
    double gap = -INFINITY;
    for (std::size_t i = 0; i < S->size(); ++i) gap = std::max(gap, env->field[i] - phi[i]);
    r["max_envelope_minus_phi"] = num(gap);
  } else if (mode == "measure") {
    const Reference mu0 = reference(ctx, S);
    env = mu0.balls ? envelope_measure(ctx.kernel, *mu0.balls, w, S, ctx.equilibrium())
                    : envelope_measure(ctx.kernel, mu0.grid, w, ctx.cfg.run_double("carrier_threshold", 1e-12), S,
                                       ctx.equilibrium());
    r["mu0"] = mu0.label;
    r["carrier"] = env->carrier;
    r["carrier_cells"] = env->carrier_cells;
  } else {
    throw InvalidInput("run.mode must be 'set' or 'measure'");
  }
  ctx.csv("envelope.csv", field_csv(env->field));
  ctx.csv("eq.csv", measure_csv(env->solution.measure));
  r["mode"] = mode;
  r["frostman_constant"] = num(env->solution.frostman_constant);
  r["energy"] = num(env->solution.energy_value);
}

void cmd_meanfield(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const Reference mu0 = reference(ctx, S);
  const double beta = ctx.cfg.run_double("beta", 10.0);
  const PotentialField phi = PotentialField::tabulate(mu0.grid.grid_ptr(), ctx.cfg.weight());
  const MeanFieldSolution sol = solve_meanfield(ctx.kernel, mu0.grid, phi, beta, ctx.meanfield());
  ctx.csv("meanfield.csv", measure_csv(sol.measure));
  ctx.csv("potential.csv", field_csv(sol.psi));
  json& r = ctx.report();
  r["mu0"] = mu0.label;
  r["beta"] = num(beta);
  r["free_energy"] = num(sol.free_energy);
  r["fixed_point_residual"] = num(sol.fixed_point_residual);
  r["anneal_path"] = nums(sol.anneal_path);
  r["iterations"] = sol.iterations;
}

/// Nondecreasing and concave tests on the converged points of f(T).
std::pair<bool, bool> curve_shape(const FreeEnergyCurve& c, double rel_tol) {
  std::vector<FreeEnergyPoint> p;
  double scale = 1.0;
  for (const auto& q : c.points)
    if (q.converged) {
      p.push_back(q);
      scale = std::max(scale, std::abs(q.f));
    }
  const double tol = rel_tol * scale;
  bool monotone = true, concave = true;
  for (std::size_t k = 1; k < p.size(); ++k)
    if (p[k].f < p[k - 1].f - tol) monotone = false;
  for (std::size_t k = 1; k + 1 < p.size(); ++k) {
    const double s1 = (p[k].f - p[k - 1].f) / (p[k].T - p[k - 1].T);
    const double s2 = (p[k + 1].f - p[k].f) / (p[k + 1].T - p[k].T);
    if (s2 > s1 + tol / std::min(p[k].T - p[k - 1].T, p[k + 1].T - p[k].T)) concave = false;
  }
  return {monotone, concave};
}

void cmd_scan_ft(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const Reference mu0 = reference(ctx, S);
  const auto T = ctx.cfg.run_list("T", {1.0, 0.3, 0.1, 0.03, 0.01});
  const FreeEnergyCurve curve = free_energy_scan(ctx.kernel, mu0.grid, ctx.cfg.weight(), T, S, ctx.meanfield());
  Table t({"T", "f", "converged"});
  json pts = json::array();
  for (const auto& p : curve.points) {
    t.row({p.T, p.f, p.converged ? 1.0 : 0.0});
    pts.push_back({{"T", p.T}, {"f", num(p.f)}, {"converged", p.converged}});
  }
  ctx.csv("scan.csv", t.str());
  const auto [monotone, concave] = curve_shape(curve, ctx.cfg.run_double("shape_tol", 1e-4));
  json& r = ctx.report();
  r["mu0"] = mu0.label;
  r["points"] = pts;
  r["inf_energy"] = num(curve.inf_energy);
  r["gap_at_zero"] = num(curve.gap_at_zero);
  r["nondecreasing"] = monotone;
  r["concave"] = concave;
}

void cmd_phase_scan(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const Reference mu0 = reference(ctx, S);
  const auto h = ctx.cfg.run_list("h", {-0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4});
  const double T = ctx.cfg.run_double("T", 0.0);
  const WeightFunction phi0 = WeightExpr::parse(ctx.cfg.run_string("phi0", "0")).function();
  const auto rows = phase_scan(ctx.kernel, mu0.grid, phi0, ctx.cfg.weight(), h, T, ctx.meanfield());
  Table t({"h", "f", "dfdh", "central", "converged"});
  json js = json::array();
  double left = 0.0;
  std::vector<double> hp, dp;
  for (const auto& row : rows) {
    t.row({row.h, row.f, row.dfdh, row.central, row.converged ? 1.0 : 0.0});
    js.push_back({{"h", row.h}, {"f", num(row.f)}, {"dfdh", num(row.dfdh)}, {"converged", row.converged}});
    if (!row.converged) continue;
    if (row.h < 0.0) left = std::max(left, std::abs(row.dfdh));
    if (row.h >= 0.0) {
      hp.push_back(row.h);
      dp.push_back(row.dfdh);
    }
  }
  // least-squares slope of df/dh on h >= 0
  double right = NAN;
  if (hp.size() >= 2) {
    double mh = 0, md = 0;
    for (std::size_t k = 0; k < hp.size(); ++k) mh += hp[k] / hp.size(), md += dp[k] / hp.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < hp.size(); ++k) sxy += (hp[k] - mh) * (dp[k] - md), sxx += (hp[k] - mh) * (hp[k] - mh);
    right = sxy / sxx;
  }
  ctx.csv("phase.csv", t.str());
  json& r = ctx.report();
  r["mu0"] = mu0.label;
  r["T"] = T;
  r["rows"] = js;
  r["max_abs_dfdh_left"] = num(left);
  r["curvature_right"] = num(right);
}

GasConfig gas_config(const Context& ctx) {
  GasConfig g;
  g.N = ctx.cfg.run_int("N", 2);
  g.beta_N = ctx.cfg.run_double("beta_N", 1.0);
  g.sweeps = ctx.cfg.run_int("sweeps", 10000);
  g.chains = ctx.cfg.run_int("chains", 1);
  g.proposal_scale = ctx.cfg.run_double("proposal_scale", 0.1);
  g.thin = ctx.cfg.run_int("thin", 10);
  g.seed = ctx.cfg.seed();
  if (g.N < 2) throw InvalidInput("run.N must be at least 2");
  if (g.sweeps < 1 || g.chains < 1 || g.thin < 0) throw InvalidInput("sweeps, chains and thin must be positive");
  return g;
}

ReferenceMeasure reference_sampler(const Reference& mu0) {
  return mu0.balls ? ReferenceMeasure(*mu0.balls) : ReferenceMeasure(mu0.grid);
}

void cmd_gas_mc(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const Reference mu0 = reference(ctx, S);
  const GasConfig g = gas_config(ctx);
  const GibbsResult res = sample_gibbs(PairInteraction::riesz(ctx.kernel), reference_sampler(mu0), ctx.cfg.weight(), g);
  if (!res.samples.empty()) ctx.csv("density.csv", measure_csv(empirical_expectation(res.samples, S)));
  json chains = json::array();
  for (const auto& c : res.chains)
    chains.push_back({{"mean_H", num(c.mean_H)}, {"se_H", num(c.se_H)}, {"acceptance", num(c.acceptance)}});
  json& r = ctx.report();
  r["mu0"] = mu0.label;
  r["N"] = g.N;
  r["beta_N"] = g.beta_N;
  r["mean_H"] = num(res.mean_H);
  r["se_H"] = num(res.se_H);
  r["acceptance"] = num(res.acceptance);
  r["samples"] = res.samples.size();
  r["chains"] = chains;
}

std::string positions_csv(const std::vector<Point>& x) {
  const int d = std::max(1, x.empty() ? 1 : x.front().dim);
  std::vector<std::string> cols;
  for (int a = 0; a < d; ++a) cols.push_back("x" + std::to_string(a + 1));
  Table t(cols);
  for (const Point& p : x) {
    std::vector<double> v;
    for (int a = 0; a < d; ++a) v.push_back(p[a]);
    t.row(v);
  }
  return t.str();
}

void cmd_fekete(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const int N = ctx.cfg.run_int("N", 10);
  const int restarts = ctx.cfg.run_int("restarts", 3);
  if (N < 2 || restarts < 1) throw InvalidInput("fekete needs N >= 2 and restarts >= 1");
  const FeketeResult f = fekete_points(PairInteraction::riesz(ctx.kernel), S, ctx.cfg.weight(), N, restarts,
                                       ctx.cfg.seed());
  ctx.csv("fekete.csv", positions_csv(f.config.positions));
  json& r = ctx.report();
  r["N"] = N;
  r["F"] = num(f.F);
  r["hamiltonian"] = num(f.config.hamiltonian);
}

std::vector<double> beta_grid(double beta_max, int steps) {
  if (!(beta_max > 0.0) || steps < 1) throw InvalidInput("ti needs beta_max > 0 and steps >= 1");
  std::vector<double> b;
  for (int k = 0; k <= steps; ++k) b.push_back(beta_max * k / steps);
  return b;
}

json ti_rows(Context& ctx, const std::vector<TIRow>& rows) {
  Table t({"beta", "mean_H", "se_H", "logZ", "se", "F_N"});
  json js = json::array();
  for (const auto& row : rows) {
    t.row({row.beta, row.mean_H, row.se_H, row.logZ, row.se, row.F_N});
    js.push_back({{"beta", row.beta}, {"mean_H", num(row.mean_H)}, {"logZ", num(row.logZ)}, {"se", num(row.se)},
                  {"F_N", num(row.F_N)}});
  }
  ctx.csv("ti.csv", t.str());
  return js;
}

void cmd_ti(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const Reference mu0 = reference(ctx, S);
  const GasConfig g = gas_config(ctx);
  const auto rows = free_energy_ti(PairInteraction::riesz(ctx.kernel), reference_sampler(mu0), ctx.cfg.weight(), g,
                                   beta_grid(ctx.cfg.run_double("beta_max", 1.0), ctx.cfg.run_int("steps", 10)));
  json& r = ctx.report();
  r["mu0"] = mu0.label;
  r["N"] = g.N;
  r["rows"] = ti_rows(ctx, rows);
  r["logZ"] = num(rows.back().logZ);
  r["se"] = num(rows.back().se);
  r["F_N"] = num(rows.back().F_N);
}

/// Orthogonality measure for the orthopoly family of commands.
std::shared_ptr<const SpectralMeasure> spectral(Context& ctx, int n, GridPtr& S, std::string& label) {
  S = ctx.cfg.domain_grid();
  const int order = std::max(ctx.cfg.run_int("order", n + 1), 1);
  if (auto balls = ctx.cfg.ball_union()) {
    label = "ball union file";
    return std::make_shared<SpectralMeasure>(SpectralMeasure::from_balls(*balls, order));
  }
  label = ctx.cfg.run_string("mu0", "lebesgue");
  if (label == "arcsine" && ctx.cfg.domain_kind() == "interval")
    return std::make_shared<SpectralMeasure>(
        SpectralMeasure::arcsine(interval_a(ctx.cfg), interval_b(ctx.cfg), std::max(4 * n, 200)));
  return std::make_shared<SpectralMeasure>(SpectralMeasure::from_grid(reference(ctx, S).grid, order));
}

double default_target(Context& ctx, const GridPtr& S) {
  if (ctx.cfg.has_run("target")) return ctx.cfg.run_double("target", 0.0);
  if (ctx.cfg.domain_kind() == "interval" && ctx.kernel.log_case())
    return interval_robin(interval_a(ctx.cfg), interval_b(ctx.cfg));
  return capacity(ctx.kernel, S, nullptr, ctx.equilibrium()).inf_energy;
}

void cmd_orthopoly(Context& ctx) {
  const int n = ctx.cfg.run_int("n", 40);
  if (n < 1) throw InvalidInput("run.n must be positive");
  GridPtr S;
  std::string label;
  const OPBasis basis = build_basis(spectral(ctx, n, S, label), n);
  const double target = default_target(ctx, S);
  const RegularityVerdict v = regularity_rate(basis, target, ctx.cfg.run_double("margin", 0.05));
  json b = {{"requested_degree", basis.requested_degree},
            {"degree", basis.degree},
            {"numeric_loss", basis.numeric_loss ? json(*basis.numeric_loss) : json(nullptr)},
            {"log_kappa", nums(basis.log_kappa)},
            {"gram_error", num(basis.gram_error())},
            {"real_support", basis.real_support()}};
  if (basis.real_support()) {
    b["a"] = nums(basis.recurrence_a());
    b["b"] = nums(basis.recurrence_b());
  }
  ctx.json_file("basis.json", b);
  Table t({"k", "log_kappa", "rate"});
  for (int k = 0; k <= basis.degree; ++k) t.row({double(k), basis.log_kappa[k], k ? basis.log_kappa[k] / k : NAN});
  ctx.csv("kappa.csv", t.str());
  json& r = ctx.report();
  r["mu0"] = label;
  r["degree"] = basis.degree;
  r["numeric_loss"] = b["numeric_loss"];
  r["gram_error"] = b["gram_error"];
  r["target"] = num(target);
  r["rate"] = v.rates.empty() ? json(nullptr) : num(v.rates.back());
  r["min_deviation"] = num(v.min_deviation);
  r["max_deviation"] = num(v.max_deviation);
  r["verdict"] = to_string(v.verdict);
}

void cmd_christoffel(Context& ctx) {
  const int k = ctx.cfg.run_int("k", 50);
  if (k < 0) throw InvalidInput("run.k must be nonnegative");
  GridPtr S;
  std::string label;
  const auto sm = spectral(ctx, k, S, label);
  const OPBasis basis = build_basis(sm, k);
  if (basis.numeric_loss) throw NumericLoss(*basis.numeric_loss);
  const GridMeasure dens = christoffel_density(basis, k, sm->grid ? nullptr : S);
  ctx.csv("christoffel.csv", measure_csv(dens));
  json& r = ctx.report();
  r["mu0"] = label;
  r["k"] = k;
  r["mass"] = num(dens.total_mass());
  // distance to the unweighted equilibrium measure of the same cells
  const GridPtr G = dens.grid_ptr();
  if (G->size() <= 20000) {
    const GridMeasure eq =
        equilibrium_measure(ctx.kernel, G, PotentialField::constant(G, 0.0), ctx.equilibrium()).measure;
    r["l1_to_equilibrium"] = num(l1_distance(dens.normalized(), eq));
  }
}

void cmd_detfree(Context& ctx) {
  std::vector<int> Ns;
  for (double x : ctx.cfg.run_list("N", {2, 5, 10, 20, 40})) {
    if (x < 1 || x != std::floor(x)) throw InvalidInput("run.N entries must be positive integers");
    Ns.push_back(static_cast<int>(x));
  }
  std::sort(Ns.begin(), Ns.end());
  GridPtr S;
  std::string label;
  const OPBasis basis = build_basis(spectral(ctx, Ns.back(), S, label), Ns.back());
  Table t({"N", "F_N", "log_Z"});
  json rows = json::array();
  bool increasing = true;
  double prev = -INFINITY;
  for (int N : Ns) {
    const double F = N >= 2 ? determinantal_free_energy(basis, N) : NAN;
    const double Z = determinantal_log_partition(basis, N);
    t.row({double(N), F, Z});
    rows.push_back({{"N", N}, {"F_N", num(F)}, {"log_Z", num(Z)}});
    if (N >= 2) {
      if (F < prev) increasing = false;
      prev = F;
    }
  }
  ctx.csv("detfree.csv", t.str());
  json& r = ctx.report();
  r["mu0"] = label;
  r["rows"] = rows;
  r["increasing"] = increasing;
}

void cmd_capacity(Context& ctx) {
  CapacityReport c;
  const std::string kind = ctx.cfg.domain_kind();
  const WeightFunction w = ctx.cfg.weight();
  if (auto balls = ctx.cfg.ball_union()) {
    c = capacity(ctx.kernel, *balls, w, ctx.equilibrium());
  } else if (kind == "disk") {
    const json& d = ctx.cfg.tree["domain"];
    Point center{0.0, 0.0};
    if (d.contains("center")) {
      center = Point::zero(static_cast<int>(d["center"].size()));
      for (int i = 0; i < center.dim; ++i) center[i] = d["center"][i].get<double>();
    }
    c = capacity(ctx.kernel,
                 capacity_ball_grid(ctx.kernel, center, d.value("R", 1.0), ctx.cfg.solver_h(),
                                    ctx.cfg.run_int("sphere_patches", 400)),
                 w, ctx.equilibrium());
  } else {
    c = capacity(ctx.kernel, ctx.cfg.domain_grid(), w, ctx.equilibrium());
  }
  json& r = ctx.report();
  r["set"] = c.set;
  r["inf_energy"] = num(c.inf_energy);
  r["capacity"] = num(c.value);
  r["residual"] = num(c.residual);
}

void cmd_ullman(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const Reference mu0 = reference(ctx, S);
  const WeightFunction w = ctx.cfg.weight();
  const UllmanReport u =
      mu0.balls ? ullman_test(ctx.kernel, *mu0.balls, w, S, ctx.equilibrium())
                : ullman_test(ctx.kernel, mu0.grid, w, ctx.cfg.run_double("carrier_threshold", 1e-12), ctx.equilibrium());
  json& r = ctx.report();
  r["mu0"] = mu0.label;
  r["carrier_capacity"] = num(u.carrier_capacity);
  r["support_capacity"] = num(u.support_capacity);
  r["ratio"] = num(u.ratio);
  r["equal"] = u.equal;
}

void cmd_determine(Context& ctx) {
  const GridPtr S = ctx.cfg.domain_grid();
  const Reference mu0 = reference(ctx, S);
  DeterminingOptions o;
  o.ensemble_size = ctx.cfg.run_int("ensemble_size", 50);
  o.seed = ctx.cfg.seed();
  o.tol = ctx.cfg.run_double("tol", 4e-3);
  o.carrier_threshold = ctx.cfg.run_double("carrier_threshold", 1e-12);
  o.equilibrium = ctx.equilibrium();
  if (o.ensemble_size < 1) throw InvalidInput("run.ensemble_size must be positive");
  const DeterminingReport d = mu0.balls ? determining_test(ctx.kernel, *mu0.balls, ctx.cfg.weight(), S, o)
                                        : determining_test(ctx.kernel, mu0.grid, ctx.cfg.weight(), o, S);
  Table t({"index", "gap"});
  for (std::size_t i = 0; i < d.gaps.size(); ++i) t.row({double(i), d.gaps[i]});
  ctx.csv("gaps.csv", t.str());
  json& r = ctx.report();
  r["mu0"] = mu0.label;
  r["ensemble_size"] = d.ensemble_size;
  r["max_gap"] = num(d.max_gap);
  r["envelope_gap"] = num(d.envelope_gap);
  r["verdict"] = to_string(d.verdict);
}

void cmd_construct_measure(Context& ctx) {
  const int lemma = ctx.cfg.run_int("lemma", 1);
  std::optional<Construction> built;
  json& r = ctx.report();
  if (lemma == 1) {
    Point lo, hi;
    const std::string kind = ctx.cfg.domain_kind();
    const json& d = ctx.cfg.tree["domain"];
    if (kind == "interval") {
      lo = Point{interval_a(ctx.cfg)};
      hi = Point{interval_b(ctx.cfg)};
    } else if (kind == "box") {
      lo = Point::zero(static_cast<int>(d["lo"].size()));
      hi = lo;
      for (int i = 0; i < lo.dim; ++i) lo[i] = d["lo"][i].get<double>(), hi[i] = d["hi"][i].get<double>();
    } else {
      throw InvalidInput("the lemma-1 construction needs an interval or box domain");
    }
    const WeightFunction w = ctx.cfg.weight();
    BMConstructionOptions o;
    o.k_max = ctx.cfg.run_int("k_max", 12);
    o.grid_h = ctx.cfg.solver_h();
    o.equilibrium = ctx.equilibrium();
    const double capK = capacity(ctx.kernel, share(GridSet::box(lo, hi, o.grid_h)), w, o.equilibrium).value;
    const double delta = ctx.cfg.run_double("delta_fraction", 0.5) * capK;
    built = construct_bm_not_determining(ctx.kernel, lo, hi, w, delta, o);
    r["delta"] = num(delta);
  } else if (lemma == 2) {
    built = construct_non_bm(ctx.cfg.run_list("eps", {}), ctx.cfg.run_int("k_max", 64));
  } else {
    throw InvalidInput("run.lemma must be 1 or 2");
  }
  const Construction& c = *built;
  ctx.json_file("measure.json", ball_union_to_json(c.measure));
  Table t({"k", "points", "lambda", "log_lambda", "radius", "ball_capacity", "bound"});
  for (const auto& row : c.table)
    t.row({double(row.k), double(row.points), row.lambda, row.log_lambda, row.radius, row.ball_capacity, row.bound});
  ctx.csv("table.csv", t.str());
  r["lemma"] = lemma;
  r["components"] = c.measure.components().size();
  r["levels"] = c.table.size();
  r["capacity_bound"] = num(c.capacity_bound);
  r["threshold"] = num(c.threshold);
  r["tail_mass"] = num(c.tail_mass);
  r["support_capacity"] = num(c.support_capacity);
}

/// V = -1 at the origin and 0 elsewhere, W(x,y) = V(x) + V(y), mu0 = dx on [0,1].
void cmd_demo_counterexample_v(Context& ctx) {
  if (!ctx.cfg.domain_given) {
    ctx.cfg.tree["domain"] = {{"kind", "interval"}, {"a", 0.0}, {"b", 1.0}};
    ctx.cfg.domain_given = true;
  }
  if (ctx.cfg.domain_kind() != "interval" || interval_a(ctx.cfg) != 0.0)
    throw InvalidInput("this demo lives on an interval starting at 0");
  const GridPtr S = ctx.cfg.domain_grid();
  const auto V = [](const Point& x) { return x[0] == 0.0 ? -1.0 : 0.0; };
  const PairInteraction W = PairInteraction::separable(V);
  GasConfig g = gas_config(ctx);
  if (!ctx.cfg.has_run("N")) g.N = 8;
  if (!ctx.cfg.has_run("sweeps")) g.sweeps = 2000;
  const ReferenceMeasure mu0(GridMeasure::lebesgue(S));
  const auto rows = free_energy_ti(W, mu0, nullptr, g, beta_grid(ctx.cfg.run_double("beta_max", 1.0),
                                                                 ctx.cfg.run_int("steps", 4)));
  const double F_N = rows.back().F_N + 0.0;  // drop a negative zero
  // inf E = inf over probability measures of the integral of V, attained at delta_0
  const FeketeResult fk = fekete_points(W, S, nullptr, g.N, 1, g.seed);
  const double infE = fk.F;
  json& r = ctx.report();
  r["N"] = g.N;
  r["rows"] = ti_rows(ctx, rows);
  r["F_N"] = num(F_N);
  r["inf_energy"] = num(infE);
  r["minimizer"] = point_json(fk.config.positions.front());
  r["gap"] = num(F_N - infE);
  r["verdict"] = F_N - infE > 0.5 ? "gap" : "no-gap";
}

void cmd_demo_weighted(Context& ctx) {
  if (!ctx.cfg.domain_given) {
    ctx.cfg.tree["domain"] = {{"kind", "disk"}, {"R", 1.5}, {"center", {0.0, 0.0}}};
    ctx.cfg.domain_given = true;
    if (!ctx.cfg.tree["solver"].contains("grid_h")) ctx.cfg.tree["solver"]["grid_h"] = 0.05;
  }
  const GridPtr K = ctx.cfg.domain_grid();
  if (K->dim() != 2) throw InvalidInput("this demo needs a planar domain");
  const auto ts = ctx.cfg.run_list("t", {3.0, 4.0, 5.0});
  Table tab({"t", "constrained", "witness", "overlay_inf", "gap"});
  json rows = json::array();
  bool all = true;
  for (double t : ts) {
    const WeightedCounterexample w = counterexample_weighted(ctx.kernel, K, ctx.cfg.weight(), t,
                                                             ctx.cfg.run_int("circle_cells", 400), ctx.equilibrium());
    tab.row({w.t, w.constrained, w.witness, w.overlay_inf, w.gap});
    rows.push_back({{"t", t},
                    {"constrained", num(w.constrained)},
                    {"witness", num(w.witness)},
                    {"overlay_inf", num(w.overlay_inf)},
                    {"gap", num(w.gap)},
                    {"gap_at_least_t_minus_2", w.gap >= t - 2.0}});
    all = all && w.gap >= t - 2.0;
  }
  ctx.csv("counterexample.csv", tab.str());
  json& r = ctx.report();
  r["rows"] = rows;
  r["all_gaps_at_least_t_minus_2"] = all;
}

using Handler = void (*)(Context&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> m = {
      {"equilibrium", cmd_equilibrium},
      {"envelope", cmd_envelope},
      {"meanfield", cmd_meanfield},
      {"scan-ft", cmd_scan_ft},
      {"phase-scan", cmd_phase_scan},
      {"gas-mc", cmd_gas_mc},
      {"fekete", cmd_fekete},
      {"ti", cmd_ti},
      {"orthopoly", cmd_orthopoly},
      {"christoffel", cmd_christoffel},
      {"detfree", cmd_detfree},
      {"capacity", cmd_capacity},
      {"ullman", cmd_ullman},
      {"determine", cmd_determine},
      {"construct-measure", cmd_construct_measure},
      {"demo-counterexample-v", cmd_demo_counterexample_v},
      {"demo-weighted-counterexample", cmd_demo_weighted},
  };
  return m;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, h] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

CommandResult execute(const std::string& command, ExperimentConfig& config) {
  const auto it = handlers().find(command);
  if (it == handlers().end()) throw InvalidInput("unknown command '" + command + "'");
  config.validate();
  Context ctx(config);
  it->second(ctx);
  // the output directory is where a run goes, not part of what it computes
  json echo = config.tree;
  echo["output"].erase("dir");
  json report = {{"command", command}, {"config", echo}, {"seed", config.seed()}, {"results", ctx.result.report}};
  ctx.result.report = report;
  if (config.wants("json")) ctx.result.artifacts.push_back({"report.json", report.dump(2) + "\n"});
  return std::move(ctx.result);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const SyntaxError*>(&e) ||
      dynamic_cast<const IoError*>(&e) || dynamic_cast<const GridMismatch*>(&e) ||
      dynamic_cast<const Unsupported*>(&e) || dynamic_cast<const EmptyCarrier*>(&e) ||
      dynamic_cast<const CoincidentPoints*>(&e) || dynamic_cast<const nlohmann::json::exception*>(&e) ||
      dynamic_cast<const toml::parse_error*>(&e))
    return 2;
  return 3;
}

int run(const std::string& command, ExperimentConfig config, std::ostream& err) {
  try {
    CommandResult res = execute(command, config);
    write_outputs(res.artifacts, config.output_dir(), config.seed());
    return 0;
  } catch (const std::exception& e) {
    err << "potlab " << command << ": " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Potential theory and Coulomb gas experiments"};
  std::string config_path, out_dir;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  app.add_option("-c,--config", config_path, "TOML config file (or a report.json to rerun)");
  app.add_option("-s,--set", sets, "Override section.key=value (repeatable)")->allow_extra_args(false);
  app.add_option("-o,--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Seed of the run");
  static const std::map<std::string, std::string> about = {
      {"equilibrium", "weighted equilibrium measure and Frostman check"},
      {"envelope", "set or measure envelope of the weight"},
      {"meanfield", "mean-field minimizer at inverse temperature run.beta"},
      {"scan-ft", "free energy f(T) over run.T"},
      {"phase-scan", "f(T, h) and df/dh over run.h"},
      {"gas-mc", "Metropolis sampling of the particle gas"},
      {"fekete", "Fekete configuration of run.N points"},
      {"ti", "log Z by thermodynamic integration"},
      {"orthopoly", "orthonormal polynomials and leading-coefficient rates"},
      {"christoffel", "Christoffel-Darboux density at degree run.k"},
      {"detfree", "determinantal free energies F_N"},
      {"capacity", "capacity of the domain"},
      {"ullman", "carrier capacity against support capacity"},
      {"determine", "randomized determining test for mu0"},
      {"construct-measure", "ball-union measure of run.lemma 1 or 2"},
      {"demo-counterexample-v", "separable V with a point well: F_N = 0 against inf E = -1"},
      {"demo-weighted-counterexample", "weight lowered on the unit circle by run.t"},
  };
  for (const std::string& name : command_names()) {
    const auto it = about.find(name);
    app.add_subcommand(name, it == about.end() ? std::string() : it->second)->fallthrough();
  }
  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "potlab: " << e.what() << " (see --help)\n";
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  ExperimentConfig cfg;
  try {
    if (config_path.empty()) {
      cfg = ExperimentConfig::defaults();
    } else if (config_path.size() > 5 && config_path.substr(config_path.size() - 5) == ".json") {
      json j = json::parse(read_text_file(config_path));
      if (j.contains("config")) j = j["config"];
      cfg = ExperimentConfig::from_json(j);
      cfg.domain_given = true;
    } else {
      cfg = ExperimentConfig::from_file(config_path);
    }
    for (const auto& s : sets) cfg.apply_override(s);
    if (!out_dir.empty()) cfg.tree["output"]["dir"] = out_dir;
    if (seed) cfg.tree["run"]["seed"] = *seed;
  } catch (const std::exception& e) {
    std::cerr << "potlab: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return run(command, std::move(cfg), std::cerr);
}

}  // namespace potlab
