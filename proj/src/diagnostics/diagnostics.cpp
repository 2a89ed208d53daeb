#include "potlab/diagnostics/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <tuple>

#include "potlab/core/errors.hpp"

namespace potlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PotentialField tabulate_or_zero(const GridPtr& g, const WeightFunction& phi) {
  return phi ? PotentialField::tabulate(g, phi) : PotentialField::constant(g, 0.0);
}

double capacity_from_energy(double e) {
  if (e == kInf) return 0.0;
  if (e <= 0.0) return kInf;
  return 1.0 / e;
}

UllmanReport compare(double carrier, double support) {
  UllmanReport r;
  r.carrier_capacity = carrier;
  r.support_capacity = support;
  r.ratio = carrier / support;
  r.equal = std::abs(r.ratio - 1.0) <= 0.02;
  return r;
}

GridPtr support_grid(const GridMeasure& mu) {
  const auto idx = mu.support(0.0);
  if (idx.empty()) throw EmptyCarrier();
  return idx.size() == mu.size() ? mu.grid_ptr() : share(mu.grid().subset(idx));
}

/// max_i (psi_i - phi_i) over cells with finite phi.
double max_excess(const PotentialField& psi, const PotentialField& phi) {
  double m = -kInf;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (phi[i] < kInf) m = std::max(m, psi[i] - phi[i]);
  return m;
}

/// A random probability measure on at most max_cells cells of S: either the
/// equilibrium measure of the cells in a random sub-box or random weights on
/// random cells.
GridMeasure random_test_measure(const KernelConfig& cfg, const GridSet& S, std::mt19937_64& rng,
                                const DeterminingOptions& opts) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::size_t n = S.size();
  std::vector<std::size_t> idx;
  const bool equilibrium_type = U(rng) < 0.5;
  if (equilibrium_type) {
    const auto [lo, hi] = S.bounding_box();
    for (int attempt = 0; attempt < 20 && idx.size() < 2; ++attempt) {
      Point a = lo, b = hi;
      for (int i = 0; i < S.dim(); ++i) {
        const double ext = hi[i] - lo[i];
        const double w = ext * (0.2 + 0.8 * U(rng));
        a[i] = lo[i] + (ext - w) * U(rng);
        b[i] = a[i] + w;
      }
      idx.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const Point& c = S.cell(i).center;
        bool in = true;
        for (int d = 0; d < S.dim(); ++d) in = in && c[d] >= a[d] && c[d] <= b[d];
        if (in && S.cell(i).shape != CellShape::point) idx.push_back(i);
      }
    }
  }
  if (idx.size() < 2) {
    const std::size_t count = 1 + static_cast<std::size_t>(U(rng) * std::min(n, opts.max_test_cells));
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(count, n));
    std::sort(idx.begin(), idx.end());
  } else if (idx.size() > opts.max_test_cells) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(opts.max_test_cells);
    std::sort(idx.begin(), idx.end());
  }
  GridPtr sub = share(S.subset(idx));
  if (equilibrium_type) {
    bool extended = false;
    for (std::size_t i = 0; i < sub->size(); ++i) extended = extended || sub->cell(i).shape != CellShape::point;
    if (extended) {
      EquilibriumOptions eo = opts.equilibrium;
      eo.tol = std::max(eo.tol, 1e-5);
      return equilibrium_measure(cfg, sub, PotentialField::constant(sub, 0.0), eo).measure;
    }
  }
  std::exponential_distribution<double> Ex(1.0);
  std::vector<double> w(sub->size());
  for (double& v : w) v = Ex(rng);
  return GridMeasure(sub, std::move(w)).normalized();
}

/// Shared part of the two determining tests: E carries mu0 (cells at which
/// the mu0-essential supremum is taken), S its support.
DeterminingReport determining_core(const KernelConfig& cfg, const GridPtr& S, const PotentialField& phiS,
                                   const GridPtr& E, const PotentialField& phiE, const PotentialField& Pmu,
                                   const PotentialField& PS, const DeterminingOptions& opts) {
  DeterminingReport rep;
  rep.ensemble_size = opts.ensemble_size;
  rep.seed = opts.seed;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  rep.max_gap = -kInf;
  for (int t = 0; t < opts.ensemble_size; ++t) {
    const int parts = 1 + static_cast<int>(U(rng) * 3.0);
    std::vector<double> psiS(S->size(), 0.0), psiE(E->size(), 0.0);
    double total = 0.0;
    std::vector<double> coef(parts);
    for (double& c : coef) total += c = 0.1 + U(rng);
    for (int p = 0; p < parts; ++p) {
      const GridMeasure nu = random_test_measure(cfg, *S, rng, opts);
      const PotentialField a = potential_on(cfg, nu, S, opts.equilibrium.diag);
      const PotentialField b = potential_on(cfg, nu, E, opts.equilibrium.diag);
      for (std::size_t i = 0; i < psiS.size(); ++i) psiS[i] += coef[p] / total * a[i];
      for (std::size_t i = 0; i < psiE.size(); ++i) psiE[i] += coef[p] / total * b[i];
    }
    const double gap = max_excess(PotentialField(S, psiS), phiS) - max_excess(PotentialField(E, psiE), phiE);
    rep.gaps.push_back(gap);
    rep.max_gap = std::max(rep.max_gap, gap);
  }
  if (opts.ensemble_size == 0) rep.max_gap = 0.0;
  rep.envelope_gap = 0.0;
  for (std::size_t i = 0; i < S->size(); ++i)
    if (phiS[i] < kInf) rep.envelope_gap = std::max(rep.envelope_gap, Pmu[i] - PS[i]);
  rep.verdict = rep.max_gap > 5.0 * opts.tol || rep.envelope_gap > 5.0 * opts.tol ? DeterminingVerdict::violated
                                                                                 : DeterminingVerdict::no_violation_found;
  return rep;
}

std::vector<double> log_radii(const MassCheckOptions& o) {
  if (!(o.r_min > 0.0) || !(o.r0 >= o.r_min) || o.radii < 1) throw InvalidInput("radii need 0 < r_min <= r0");
  std::vector<double> r(o.radii);
  for (int i = 0; i < o.radii; ++i)
    r[i] = o.radii == 1 ? o.r0 : o.r_min * std::pow(o.r0 / o.r_min, static_cast<double>(i) / (o.radii - 1));
  return r;
}

std::vector<Point> box_net(const Point& lo, const Point& hi, int net) {
  const int d = std::max(lo.dim, hi.dim);
  std::vector<Point> pts;
  const int n = std::max(net, 1);
  std::array<int, 3> cnt{1, 1, 1};
  for (int i = 0; i < d; ++i) cnt[i] = n;
  for (int a = 0; a < cnt[0]; ++a)
    for (int b = 0; b < cnt[1]; ++b)
      for (int c = 0; c < cnt[2]; ++c) {
        Point p = Point::zero(d);
        const int ix[3] = {a, b, c};
        for (int i = 0; i < d; ++i) p[i] = n == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * ix[i] / (n - 1);
        pts.push_back(p);
      }
  return pts;
}

MassCheckReport run_mass_check(const std::vector<Point>& centers, const MassCheckOptions& o,
                               const std::function<double(const Point&, double)>& mass) {
  MassCheckReport rep;
  rep.best_constant = kInf;
  for (const Point& z : centers)
    for (double r : log_radii(o)) {
      const double c = mass(z, r) / std::pow(r, o.a);
      ++rep.tests;
      if (c < rep.best_constant) {
        rep.best_constant = c;
        rep.worst_center = z;
        rep.worst_radius = r;
      }
    }
  rep.passed = rep.tests > 0 && rep.best_constant >= o.C;
  return rep;
}

}  // namespace

CapacityReport capacity(const KernelConfig& cfg, const GridPtr& K, const WeightFunction& phi,
                        const EquilibriumOptions& opts) {
  if (!K || K->size() == 0) throw InvalidInput("empty set");
  CapacityReport rep;
  rep.set = K->label();
  const bool polar = std::all_of(K->cells().begin(), K->cells().end(),
                                 [](const Cell& c) { return c.shape == CellShape::point; });
  if (polar) {
    rep.inf_energy = kInf;
    rep.value = 0.0;
    return rep;
  }
  const EquilibriumSolution sol = equilibrium_measure(cfg, K, tabulate_or_zero(K, phi), opts);
  rep.inf_energy = sol.energy_value;
  rep.value = capacity_from_energy(sol.energy_value);
  rep.residual = sol.residual;
  return rep;
}

CapacityReport capacity(const KernelConfig& cfg, const BallUnionMeasure& mu, const WeightFunction& phi,
                        const EquilibriumOptions& opts) {
  return capacity(cfg, mu.grid(), phi, opts);
}

GridPtr capacity_ball_grid(const KernelConfig& cfg, const Point& c, double r, double h, int sphere_patches) {
  if (!(r > 0.0)) throw InvalidInput("ball radius must be positive");
  if (c.dim == 3 && cfg.d() == 3 && cfg.exponent() == -1.0) return share(GridSet::sphere(c, r, sphere_patches));
  return share(GridSet::ball(c, r, h));
}

double ball_capacity_model(const KernelConfig& cfg, double r) {
  if (cfg.log_case()) {
    if (!(r < 1.0)) throw InvalidInput("log-case ball model needs r < 1");
    return -1.0 / std::log(r);
  }
  if (cfg.d() == 3 && cfg.exponent() == -1.0) return 2.0 * r;
  throw Unsupported("no ball capacity model for this kernel");
}

UllmanReport ullman_test(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                         double carrier_threshold, const EquilibriumOptions& opts) {
  const GridPtr K = support_grid(mu0);
  const auto idx = carrier_cells(mu0, carrier_threshold);
  const double cK = capacity(cfg, K, phi, opts).value;
  if (idx.size() == K->size()) return compare(cK, cK);
  const double cC = capacity(cfg, share(mu0.grid().subset(idx)), phi, opts).value;
  return compare(cC, cK);
}

UllmanReport ullman_test(const KernelConfig& cfg, const BallUnionMeasure& mu0, const WeightFunction& phi,
                         const GridPtr& K, const EquilibriumOptions& opts) {
  return compare(capacity(cfg, mu0, phi, opts).value, capacity(cfg, K, phi, opts).value);
}

std::string to_string(DeterminingVerdict v) {
  return v == DeterminingVerdict::violated ? "violated" : "no-violation-found";
}

DeterminingReport determining_test(const KernelConfig& cfg, const GridMeasure& mu0, const WeightFunction& phi,
                                   const DeterminingOptions& opts, GridPtr S) {
  if (!S) S = support_grid(mu0);
  const auto idx = carrier_cells(mu0, opts.carrier_threshold);
  const GridPtr E = idx.size() == mu0.size() ? mu0.grid_ptr() : share(mu0.grid().subset(idx));
  const PotentialField phiS = tabulate_or_zero(S, phi);
  const PotentialField phiE = tabulate_or_zero(E, phi);
  const WeightFunction f = phi ? phi : WeightFunction([](const Point&) { return 0.0; });
  const EnvelopeField PS = envelope_set(cfg, S, phiS, opts.equilibrium);
  const PotentialField Pmu = E->same_as(*S) ? PS.field
                                            : envelope_measure(cfg, mu0, f, opts.carrier_threshold, S,
                                                               opts.equilibrium).field;
  return determining_core(cfg, S, phiS, E, phiE, Pmu, PS.field, opts);
}

DeterminingReport determining_test(const KernelConfig& cfg, const BallUnionMeasure& mu0, const WeightFunction& phi,
                                   const GridPtr& S, const DeterminingOptions& opts) {
  if (!S) throw InvalidInput("ball-union determining test needs the support grid");
  const GridPtr E = mu0.grid();
  const PotentialField phiS = tabulate_or_zero(S, phi);
  const PotentialField phiE = tabulate_or_zero(E, phi);
  const WeightFunction f = phi ? phi : WeightFunction([](const Point&) { return 0.0; });
  const EnvelopeField PS = envelope_set(cfg, S, phiS, opts.equilibrium);
  const EnvelopeField Pmu = envelope_measure(cfg, mu0, f, S, opts.equilibrium);
  return determining_core(cfg, S, phiS, E, phiE, Pmu.field, PS.field, opts);
}

double grid_ball_mass(const GridMeasure& mu, const Point& z, double r) {
  constexpr int kSplit = 16;
  const GridSet& g = mu.grid();
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = mu.weight(i);
    if (w == 0.0) continue;
    const Cell& c = g.cell(i);
    const double D = distance(c.center, z);
    const double R = c.radius();
    if (D + R <= r) {
      m += w;
      continue;
    }
    if (D - R > r) continue;
    if (c.shape == CellShape::cube) {
      const int k = c.center.dim;
      int inside = 0, total = 0;
      std::array<int, 3> cnt{1, 1, 1};
      for (int d = 0; d < k; ++d) cnt[d] = kSplit;
      for (int a = 0; a < cnt[0]; ++a)
        for (int b = 0; b < cnt[1]; ++b)
          for (int e = 0; e < cnt[2]; ++e) {
            Point p = c.center;
            const int ix[3] = {a, b, e};
            for (int d = 0; d < k; ++d) p[d] += c.size * ((ix[d] + 0.5) / kSplit - 0.5);
            inside += distance(p, z) <= r;
            ++total;
          }
      m += w * inside / total;
    } else if (c.shape == CellShape::segment) {
      int inside = 0;
      for (int a = 0; a < kSplit; ++a)
        inside += distance(c.center + (c.size * ((a + 0.5) / kSplit - 0.5)) * c.axis, z) <= r;
      m += w * inside / kSplit;
    } else if (D <= r) {
      m += w;
    }
  }
  return m / mu.total_mass();
}

MassCheckReport bm_mass_check(const BallUnionMeasure& mu0, const MassCheckOptions& opts) {
  std::vector<Point> centers = opts.centers;
  if (centers.empty()) {
    Point lo, hi;
    if (mu0.support_box) {
      std::tie(lo, hi) = *mu0.support_box;
    } else {
      std::tie(lo, hi) = mu0.grid()->bounding_box();
    }
    centers = box_net(lo, hi, opts.net);
  }
  const double total = mu0.total_mass();
  return run_mass_check(centers, opts, [&](const Point& z, double r) { return mu0.ball_mass(z, r) / total; });
}

MassCheckReport bm_mass_check(const GridMeasure& mu0, const MassCheckOptions& opts) {
  std::vector<Point> centers = opts.centers;
  if (centers.empty()) {
    const auto idx = mu0.support(0.0);
    if (idx.empty()) throw EmptyCarrier();
    const GridSet& g = mu0.grid();
    const GridSet sup = g.subset(idx);
    const auto [lo, hi] = sup.bounding_box();
    for (const Point& p : box_net(lo, hi, opts.net)) {
      for (std::size_t i : idx)
        if (distance(g.cell(i).center, p) <= g.cell(i).radius() * (1.0 + 1e-9)) {
          centers.push_back(p);
          break;
        }
    }
  }
  return run_mass_check(centers, opts, [&](const Point& z, double r) { return grid_ball_mass(mu0, z, r); });
}

Construction construct_bm_not_determining(const KernelConfig& cfg, const Point& lo, const Point& hi,
                                          const WeightFunction& phi, double delta,
                                          const BMConstructionOptions& opts) {
  const int d = lo.dim;
  if (d < 1 || hi.dim != d) throw InvalidInput("box corners need a common dimension");
  for (int i = 0; i < d; ++i)
    if (!(hi[i] > lo[i])) throw InvalidInput("box needs lo < hi");
  if (opts.k_max < 1) throw InvalidInput("k_max must be positive");
  const GridPtr K = share(GridSet::box(lo, hi, opts.grid_h));
  const double cK = capacity(cfg, K, phi, opts.equilibrium).value;
  if (!(delta > 0.0) || !(delta < cK)) throw InvalidInput("delta must lie in (0, C(K, phi))");

  std::vector<std::vector<Point>> levels(opts.k_max + 1);
  int used = 0;
  for (int k = 1; k <= opts.k_max; ++k) {
    std::array<int, 3> jlo{0, 0, 0}, jhi{0, 0, 0};
    bool empty = false;
    for (int i = 0; i < d; ++i) {
      jlo[i] = static_cast<int>(std::ceil(k * lo[i] + 1.0 - 1e-9));
      jhi[i] = static_cast<int>(std::floor(k * hi[i] - 1.0 + 1e-9));
      empty = empty || jhi[i] < jlo[i];
    }
    if (empty) continue;
    for (int a = jlo[0]; a <= jhi[0]; ++a)
      for (int b = jlo[1]; b <= jhi[1]; ++b)
        for (int c = jlo[2]; c <= jhi[2]; ++c) {
          Point p = Point::zero(d);
          const int ix[3] = {a, b, c};
          for (int i = 0; i < d; ++i) p[i] = static_cast<double>(ix[i]) / k;
          levels[k].push_back(p);
        }
    ++used;
  }
  if (used == 0) throw InvalidInput("box too small for any level");

  double lam_sum = 0.0;
  for (int k = 1; k <= opts.k_max; ++k)
    if (!levels[k].empty()) lam_sum += 1.0 / (static_cast<double>(k) * k);

  Construction out{BallUnionMeasure({BallComponent{lo, 1.0, 1.0, 0.0}}, true), {}, 0.0, delta, 0.0, cK};
  std::vector<BallComponent> comps;
  for (int k = 1; k <= opts.k_max; ++k) {
    const auto& pts = levels[k];
    if (pts.empty()) continue;
    const double M = static_cast<double>(pts.size());
    const double alloc = 0.9 * delta / (used * M);
    double eps;
    if (cfg.log_case()) eps = std::exp(-1.0 / alloc);
    else if (cfg.d() == 3 && cfg.exponent() == -1.0) eps = 0.5 * alloc;
    else throw Unsupported("construction needs the log or Newtonian kernel");
    eps = std::min(eps, 0.25 / k);
    LevelRow row;
    row.k = k;
    row.points = pts.size();
    row.lambda = 1.0 / (static_cast<double>(k) * k) / lam_sum;
    row.log_lambda = std::log(row.lambda);
    row.radius = eps;
    row.ball_capacity = ball_capacity_model(cfg, eps);
    row.bound = M * row.ball_capacity;
    out.capacity_bound += row.bound;
    out.table.push_back(row);
    for (const Point& p : pts) comps.push_back(BallComponent{p, eps, row.lambda / M, row.log_lambda - std::log(M)});
  }
  double head = 0.0;
  for (int k = 1; k <= opts.k_max; ++k) head += 1.0 / (static_cast<double>(k) * k);
  out.tail_mass = 1.0 - head * 6.0 / (std::numbers::pi * std::numbers::pi);
  out.measure = BallUnionMeasure(std::move(comps), true);
  out.measure.support_box = std::make_pair(lo, hi);
  return out;
}

Construction construct_non_bm(std::vector<double> eps_schedule, int k_max) {
  const KernelConfig cfg = KernelConfig::logarithmic();
  std::vector<int> ks;
  for (int k = 2; k <= k_max; k *= 2) ks.push_back(k);
  if (ks.empty()) throw InvalidInput("k_max must be at least 2");
  const double threshold = 0.5 / std::log(4.0);  // C([0,1]) / 2
  const double strict = threshold * (1.0 - 1e-12);
  auto bound_of = [](int k, double eps) { return k * (-1.0 / std::log(2.0 * eps)); };

  auto auto_eps = [&](int k) {
    // eps = 2^-j, so log(2 eps) = (1 - j) log 2
    int j = 2;
    while (j < 1070 && !(std::ldexp(1.0, -j) < 1.0 / k && k / ((j - 1) * std::log(2.0)) < strict)) ++j;
    return std::ldexp(1.0, -j);
  };
  if (eps_schedule.empty())
    for (int k : ks) eps_schedule.push_back(auto_eps(k));
  if (eps_schedule.size() != ks.size()) throw InvalidInput("schedule needs one radius per level k = 2, 4, ..., k_max");

  Construction out{BallUnionMeasure({BallComponent{Point{0.5}, 0.5, 1.0, 0.0}}, true), {}, 0.0, threshold, 0.0,
                   1.0 / std::log(4.0)};
  std::vector<double> loglam(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double eps = eps_schedule[i];
    if (!(eps > 0.0) || !(eps < 1.0 / ks[i]) || !(bound_of(ks[i], eps) < threshold))
      throw InvalidInput("radius for k = " + std::to_string(ks[i]) + " violates k C(B_2eps) < C([0,1])/2");
    loglam[i] = -1.0 / (eps * eps);
  }
  const double top = *std::max_element(loglam.begin(), loglam.end());
  double s = 0.0;
  for (double l : loglam) s += std::exp(l - top);
  const double lse = top + std::log(s);

  std::vector<BallComponent> comps;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const int k = ks[i];
    LevelRow row;
    row.k = k;
    row.points = static_cast<std::size_t>(k - 1);
    row.log_lambda = loglam[i] - lse;
    row.lambda = std::exp(row.log_lambda);
    row.radius = eps_schedule[i];
    row.ball_capacity = ball_capacity_model(cfg, 2.0 * row.radius);
    row.bound = k * row.ball_capacity;
    out.capacity_bound = std::max(out.capacity_bound, row.bound);
    out.table.push_back(row);
    const double lw = row.log_lambda - std::log(static_cast<double>(k - 1));
    for (int j = 1; j < k; ++j) comps.push_back(BallComponent{Point{static_cast<double>(j) / k}, row.radius, 0.0, lw});
  }
  // weight of the first omitted level under the automatic rule
  const double next = auto_eps(2 * ks.back());
  out.tail_mass = std::exp(-1.0 / (next * next) - lse);
  out.measure = BallUnionMeasure(std::move(comps), true);
  out.measure.support_box = std::make_pair(Point{0.0}, Point{1.0});
  return out;
}

}  // namespace potlab
