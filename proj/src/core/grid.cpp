#include "potlab/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "potlab/core/errors.hpp"

namespace potlab {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double lerp(double a, double b, int i, int n) {
  if (i == 0) return a;
  if (i == n) return b;
  return a + (b - a) * (double(i) / double(n));
}

// Lattice cells of [lo, hi] (n[i] cells along axis i) whose centres pass pred.
GridSet make_lattice(int m, const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                     const std::array<int, 3>& n, const std::function<bool(const Point&)>& pred,
                     std::string label, LatticeInfo& info) {
  const double h = (hi[0] - lo[0]) / n[0];
  info.m = m;
  info.h = h;
  info.axis_lo = lo;
  info.axis_hi = hi;
  info.axis_cells = {n[0], m >= 2 ? n[1] : 1, m >= 3 ? n[2] : 1};
  info.origin = Point::zero(m);
  for (int a = 0; a < m; ++a) info.origin[a] = 0.5 * (lerp(lo[a], hi[a], 0, n[a]) + lerp(lo[a], hi[a], 1, n[a]));
  std::vector<Cell> cells;
  const int n1 = info.axis_cells[0], n2 = info.axis_cells[1], n3 = info.axis_cells[2];
  bool first = true;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      for (int k = 0; k < n3; ++k) {
        const int idx[3] = {i, j, k};
        Point c = Point::zero(m);
        for (int a = 0; a < m; ++a)
          c[a] = 0.5 * (lerp(lo[a], hi[a], idx[a], n[a]) + lerp(lo[a], hi[a], idx[a] + 1, n[a]));
        if (!pred(c)) continue;
        cells.push_back(Cell{c, CellShape::cube, h, Point{}});
        info.index.push_back({i, j, k});
        for (int a = 0; a < 3; ++a) {
          if (first || idx[a] < info.lo[a]) info.lo[a] = idx[a];
          if (first || idx[a] > info.hi[a]) info.hi[a] = idx[a];
        }
        first = false;
      }
  if (cells.empty()) throw InvalidInput("grid has no active cells");
  return GridSet(std::move(cells), std::move(label));
}

}  // namespace

GridSet::GridSet(std::vector<Cell> cells, std::string label) : cells_(std::move(cells)), label_(std::move(label)) {
  if (cells_.empty()) throw InvalidInput("grid has no active cells");
  dim_ = 0;
  for (const Cell& c : cells_) {
    if (!(c.size >= 0.0) || !std::isfinite(c.size)) throw InvalidInput("cell sizes must be finite and nonnegative");
    dim_ = std::max(dim_, c.center.dim);
  }
}

long long GridSet::pack(const std::array<int, 3>& i) {
  return (static_cast<long long>(i[0]) << 42) ^ (static_cast<long long>(i[1] & 0x1fffff) << 21) ^
         static_cast<long long>(i[2] & 0x1fffff);
}

void GridSet::build_lookup() {
  lookup_.clear();
  if (!lattice_) return;
  for (std::size_t i = 0; i < lattice_->index.size(); ++i) lookup_[pack(lattice_->index[i])] = i;
}

double GridSet::total_volume() const {
  double v = 0.0;
  for (const Cell& c : cells_) v += c.volume();
  return v;
}

std::pair<Point, Point> GridSet::bounding_box() const {
  Point lo = Point::zero(dim_), hi = Point::zero(dim_);
  bool first = true;
  for (const Cell& c : cells_) {
    const double r = c.radius();
    for (int a = 0; a < dim_; ++a) {
      if (first || c.center[a] - r < lo[a]) lo[a] = c.center[a] - r;
      if (first || c.center[a] + r > hi[a]) hi[a] = c.center[a] + r;
    }
    first = false;
  }
  return {lo, hi};
}

double GridSet::max_cell_size() const {
  double s = 0.0;
  for (const Cell& c : cells_) s = std::max(s, c.size);
  return s;
}

GridSet GridSet::interval(double a, double b, double h) {
  if (!(b > a) || !(h > 0.0)) throw InvalidInput("interval needs a < b and h > 0");
  const int n = std::max(1, int(std::lround((b - a) / h)));
  LatticeInfo info;
  GridSet g = make_lattice(1, {a, 0, 0}, {b, 0, 0}, {n, 1, 1}, [](const Point&) { return true; },
                           "interval[" + fmt(a) + "," + fmt(b) + "] h=" + fmt((b - a) / n), info);
  g.lattice_ = std::move(info);
  g.build_lookup();
  return g;
}

GridSet GridSet::box(const Point& lo, const Point& hi, double h) {
  return from_predicate(lo, hi, h, [](const Point&) { return true; }, "box");
}

GridSet GridSet::from_predicate(const Point& lo, const Point& hi, double h,
                                const std::function<bool(const Point&)>& pred, std::string label) {
  const int m = lo.dim;
  if (m < 1 || m > 3 || hi.dim != m) throw InvalidInput("box corners must share a dimension in 1..3");
  if (!(h > 0.0)) throw InvalidInput("grid edge must be positive");
  std::array<double, 3> alo{0, 0, 0}, ahi{0, 0, 0};
  std::array<int, 3> n{1, 1, 1};
  n[0] = std::max(1, int(std::lround((hi[0] - lo[0]) / h)));
  const double he = (hi[0] - lo[0]) / n[0];
  for (int a = 0; a < m; ++a) {
    if (!(hi[a] > lo[a])) throw InvalidInput("box needs lo < hi on every axis");
    if (a > 0) n[a] = std::max(1, int(std::lround((hi[a] - lo[a]) / he)));
    alo[a] = lo[a];
    // keep the edge common to all axes
    ahi[a] = a == 0 ? hi[a] : lo[a] + n[a] * he;
  }
  LatticeInfo info;
  GridSet g = make_lattice(m, alo, ahi, n, pred, label + " h=" + fmt(he), info);
  g.lattice_ = std::move(info);
  g.build_lookup();
  return g;
}

GridSet GridSet::ball(const Point& center, double R, double h) {
  const int m = center.dim;
  if (m < 1 || m > 3) throw InvalidInput("ball dimension must be 1..3");
  if (!(R > 0.0) || !(h > 0.0)) throw InvalidInput("ball needs R > 0 and h > 0");
  const int n = std::max(1, int(std::lround(2.0 * R / h)));
  std::array<double, 3> alo{0, 0, 0}, ahi{0, 0, 0};
  std::array<int, 3> nn{1, 1, 1};
  for (int a = 0; a < m; ++a) {
    alo[a] = center[a] - R;
    ahi[a] = center[a] + R;
    nn[a] = n;
  }
  const double R2 = R * R * (1.0 + 1e-12);
  LatticeInfo info;
  GridSet g = make_lattice(
      m, alo, ahi, nn,
      [&](const Point& c) {
        const Point d = c - center;
        return d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= R2;
      },
      (m == 2 ? "disk" : "ball") + std::string(" R=") + fmt(R) + " h=" + fmt(2.0 * R / n), info);
  g.lattice_ = std::move(info);
  g.build_lookup();
  return g;
}

GridSet GridSet::circle(const Point& center, double R, int n) {
  if (n < 3 || !(R > 0.0)) throw InvalidInput("circle needs R > 0 and at least 3 arcs");
  std::vector<Cell> cells;
  cells.reserve(n);
  const double len = 2.0 * std::numbers::pi * R / n;
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * std::numbers::pi * j / n;
    Point c{center[0] + R * std::cos(th), center[1] + R * std::sin(th)};
    cells.push_back(Cell{c, CellShape::segment, len, Point{-std::sin(th), std::cos(th)}});
  }
  GridSet g(std::move(cells), "circle R=" + fmt(R) + " n=" + std::to_string(n));
  g.circles_.push_back(CircleInfo{Point{center[0], center[1]}, R, 0, std::size_t(n)});
  return g;
}

GridSet GridSet::sphere(const Point& center, double R, int n) {
  if (n < 4 || !(R > 0.0)) throw InvalidInput("sphere needs R > 0 and at least 4 patches");
  std::vector<Cell> cells;
  cells.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double side = std::sqrt(4.0 * std::numbers::pi * R * R / n);
  for (int j = 0; j < n; ++j) {
    const double z = 1.0 - (2.0 * j + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = golden * j;
    Point u{r * std::cos(th), r * std::sin(th), z};
    Point c{center[0] + R * u[0], center[1] + R * u[1], center[2] + R * u[2]};
    cells.push_back(Cell{c, CellShape::patch, side, u});
  }
  return GridSet(std::move(cells), "sphere R=" + fmt(R) + " n=" + std::to_string(n));
}

GridSet GridSet::balls(std::vector<Cell> cells, std::string label) {
  for (Cell& c : cells) c.shape = CellShape::ball;
  return GridSet(std::move(cells), std::move(label));
}

GridSet GridSet::points(const std::vector<Point>& pts, std::string label) {
  std::vector<Cell> cells;
  for (const Point& p : pts) cells.push_back(Cell{p, CellShape::point, 0.0, Point{}});
  return GridSet(std::move(cells), std::move(label));
}

GridSet GridSet::with_points(const std::vector<Point>& pts) const { return unite(points(pts)); }

GridSet GridSet::unite(const GridSet& other) const {
  GridSet g = *this;
  const std::size_t offset = g.cells_.size();
  g.cells_.insert(g.cells_.end(), other.cells_.begin(), other.cells_.end());
  g.dim_ = std::max(dim_, other.dim_);
  for (CircleInfo c : other.circles_) {
    c.first += offset;
    g.circles_.push_back(c);
  }
  g.label_ = label_ + " + " + other.label_;
  return g;
}

GridSet GridSet::translated(const Point& v) const {
  GridSet g = *this;
  for (Cell& c : g.cells_) {
    const int dim = c.center.dim;
    c.center = c.center + v;
    c.center.dim = dim;
  }
  if (g.lattice_) {
    for (int a = 0; a < g.lattice_->m; ++a) {
      g.lattice_->axis_lo[a] += v[a];
      g.lattice_->axis_hi[a] += v[a];
      g.lattice_->origin[a] += v[a];
    }
  }
  for (CircleInfo& c : g.circles_) c.center = c.center + v;
  g.label_ = label_ + " translated";
  return g;
}

GridSet GridSet::subset(const std::vector<std::size_t>& idx) const {
  if (idx.empty()) throw InvalidInput("subset is empty");
  std::vector<Cell> cells;
  cells.reserve(idx.size());
  bool lattice_ok = lattice_.has_value();
  std::size_t prev = 0;
  for (std::size_t n = 0; n < idx.size(); ++n) {
    if (idx[n] >= cells_.size()) throw InvalidInput("subset index out of range");
    if (n > 0 && idx[n] <= prev) lattice_ok = false;
    prev = idx[n];
    cells.push_back(cells_[idx[n]]);
  }
  GridSet g(std::move(cells), label_ + " subset");
  // keep the lattice when the selection is an ordered run of lattice cells
  if (lattice_ok) {
    LatticeInfo info = *lattice_;
    info.index.clear();
    std::size_t nl = 0;
    bool first = true;
    for (std::size_t i : idx) {
      if (i >= lattice_->index.size()) break;
      ++nl;
      const auto& id = lattice_->index[i];
      info.index.push_back(id);
      for (int a = 0; a < 3; ++a) {
        if (first || id[a] < info.lo[a]) info.lo[a] = id[a];
        if (first || id[a] > info.hi[a]) info.hi[a] = id[a];
      }
      first = false;
    }
    if (nl > 0) {
      g.lattice_ = std::move(info);
      g.build_lookup();
    }
  }
  // circles survive only when kept whole
  for (const CircleInfo& c : circles_) {
    auto it = std::find(idx.begin(), idx.end(), c.first);
    if (it == idx.end()) continue;
    const std::size_t pos = std::size_t(it - idx.begin());
    bool whole = pos + c.count <= idx.size();
    for (std::size_t k = 0; whole && k < c.count; ++k) whole = idx[pos + k] == c.first + k;
    if (whole) g.circles_.push_back(CircleInfo{c.center, c.radius, pos, c.count});
  }
  return g;
}

std::optional<std::size_t> GridSet::locate(const Point& x) const {
  if (lattice_) {
    const LatticeInfo& L = *lattice_;
    std::array<int, 3> id{0, 0, 0};
    bool ok = true;
    for (int a = 0; a < L.m; ++a) {
      const double t = (x[a] - L.axis_lo[a]) / L.h;
      int i = int(std::floor(t));
      if (i == L.axis_cells[a] && t - L.axis_cells[a] < 1e-9) i = L.axis_cells[a] - 1;
      if (i == -1 && t > -1e-9) i = 0;
      if (i < 0 || i >= L.axis_cells[a]) ok = false;
      id[a] = i;
    }
    for (int a = L.m; a < kMaxDim; ++a)
      if (std::abs(x[a]) > 1e-12 * (1.0 + L.h)) ok = false;
    if (ok) {
      auto it = lookup_.find(pack(id));
      if (it != lookup_.end()) return it->second;
    }
  }
  for (std::size_t i = lattice_count(); i < cells_.size(); ++i)
    if (cells_[i].contains(x, 1e-9)) return i;
  return std::nullopt;
}

std::vector<Point> GridSet::nodes() const {
  std::vector<Point> out;
  if (lattice_) {
    const LatticeInfo& L = *lattice_;
    std::set<std::array<int, 3>> verts;
    for (const auto& id : L.index) {
      const int c2 = L.m >= 2 ? 2 : 1, c3 = L.m >= 3 ? 2 : 1;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < c2; ++b)
          for (int c = 0; c < c3; ++c) verts.insert({id[0] + a, id[1] + b, id[2] + c});
    }
    for (const auto& v : verts) {
      Point p = Point::zero(L.m);
      for (int a = 0; a < L.m; ++a) p[a] = lerp(L.axis_lo[a], L.axis_hi[a], v[a], L.axis_cells[a]);
      out.push_back(p);
    }
  }
  for (std::size_t i = lattice_count(); i < cells_.size(); ++i) out.push_back(cells_[i].center);
  return out;
}

bool GridSet::same_as(const GridSet& other) const {
  if (this == &other) return true;
  if (cells_.size() != other.cells_.size()) return false;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& a = cells_[i];
    const Cell& b = other.cells_[i];
    if (a.shape != b.shape || a.size != b.size || !(a.center == b.center)) return false;
  }
  return true;
}

}  // namespace potlab
