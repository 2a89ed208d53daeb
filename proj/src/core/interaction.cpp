#include "potlab/core/interaction.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <map>
#include <mutex>
#include <tuple>
#include <unordered_map>

#include "potlab/core/cell_integrals.hpp"
#include "potlab/core/errors.hpp"

namespace potlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNearOffset = 8;

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

int fft_size(int n) {
  for (int s = std::max(n, 1);; ++s) {
    int r = s;
    for (int f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return s;
  }
}

long long offset_key(const std::array<int, 3>& o) {
  return (static_cast<long long>(o[0] + (1 << 20)) << 42) | (static_cast<long long>(o[1] + (1 << 20)) << 21) |
         static_cast<long long>(o[2] + (1 << 20));
}

}  // namespace

double DiagonalRule::value(const KernelConfig& cfg, const Cell& c) const {
  if (mode == Mode::exclude) return 0.0;
  return cell_self_mean(cfg, c);
}

struct InteractionOperator::Impl {
  KernelConfig cfg;
  GridPtr grid;
  DiagonalRule diag;
  std::size_t n = 0, nl = 0;
  std::vector<double> self;
  std::vector<char> is_polar;
  std::string method;

  // lattice kernel values by integer offset
  mutable std::mutex cache_mutex;
  mutable std::unordered_map<long long, double> near_cache;
  double lattice_self = 0.0;

  // dense storage (row-major, n x n) or extras block (ne x n)
  std::vector<double> dense;
  std::vector<double> extras;

  // FFT state
  int m = 0;
  std::array<int, 3> plo{0, 0, 0};
  std::array<int, 3> pdim{1, 1, 1};
  std::size_t preal = 0, pcomplex = 0;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  fftw_complex* khat = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;
  mutable std::mutex fft_mutex;

  Impl(const KernelConfig& c, GridPtr g, DiagonalRule d) : cfg(c), grid(std::move(g)), diag(d) {}

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (rbuf) fftw_free(rbuf);
    if (cbuf) fftw_free(cbuf);
    if (khat) fftw_free(khat);
  }

  double lattice_value(const std::array<int, 3>& o) const {
    const LatticeInfo& L = *grid->lattice();
    int amax = 0;
    for (int a = 0; a < L.m; ++a) amax = std::max(amax, std::abs(o[a]));
    if (amax == 0) return lattice_self;
    if (amax > kNearOffset) return cube_far_mean(cfg, L.m, L.h, o);
    // the pair mean depends only on |o_a| and their ordering
    std::array<int, 3> key{0, 0, 0};
    for (int a = 0; a < L.m; ++a) key[a] = std::abs(o[a]);
    std::sort(key.begin(), key.begin() + L.m);
    const long long k = offset_key(key);
    {
      std::lock_guard<std::mutex> lock(cache_mutex);
      auto it = near_cache.find(k);
      if (it != near_cache.end()) return it->second;
    }
    const double v = cube_pair_mean(cfg, L.m, L.h, key);
    std::lock_guard<std::mutex> lock(cache_mutex);
    near_cache.emplace(k, v);
    return v;
  }

  double pair(std::size_t i, std::size_t j) const {
    if (i == j) return self[i];
    if (i < nl && j < nl) {
      const LatticeInfo& L = *grid->lattice();
      std::array<int, 3> o{0, 0, 0};
      for (int a = 0; a < 3; ++a) o[a] = L.index[j][a] - L.index[i][a];
      return lattice_value(o);
    }
    const Cell& a = grid->cell(i);
    const Cell& b = grid->cell(j);
    for (const CircleInfo& c : grid->circles()) {
      if (i >= c.first && i < c.first + c.count && j >= c.first && j < c.first + c.count) {
        const std::size_t di = i > j ? i - j : j - i;
        const std::size_t sep = std::min(di, c.count - di);
        const double chord = distance(a.center, b.center);
        // neighbouring arcs are treated as collinear pieces at their chord distance
        if (sep <= 3) return collinear_mean(cfg, a.size, b.size, chord);
        break;
      }
    }
    return cell_pair_mean(cfg, a, b);
  }

  void build_fft() {
    const LatticeInfo& L = *grid->lattice();
    m = L.m;
    std::array<int, 3> span{1, 1, 1};
    for (int a = 0; a < m; ++a) {
      plo[a] = L.lo[a];
      span[a] = L.hi[a] - L.lo[a] + 1;
      pdim[a] = fft_size(2 * span[a] - 1);
    }
    preal = 1;
    for (int a = 0; a < m; ++a) preal *= pdim[a];
    pcomplex = preal / pdim[m - 1] * (pdim[m - 1] / 2 + 1);
    {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      rbuf = fftw_alloc_real(preal);
      cbuf = fftw_alloc_complex(pcomplex);
      khat = fftw_alloc_complex(pcomplex);
      fwd = fftw_plan_dft_r2c(m, pdim.data(), rbuf, cbuf, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r(m, pdim.data(), cbuf, rbuf, FFTW_ESTIMATE);
    }
    // kernel table in wrapped offsets
    const int p1 = pdim[0], p2 = m >= 2 ? pdim[1] : 1, p3 = m >= 3 ? pdim[2] : 1;
    for (int i = 0; i < p1; ++i)
      for (int j = 0; j < p2; ++j)
        for (int k = 0; k < p3; ++k) {
          const int q[3] = {i, j, k};
          std::array<int, 3> o{0, 0, 0};
          bool used = true;
          for (int a = 0; a < m; ++a) {
            o[a] = q[a] < span[a] ? q[a] : q[a] - pdim[a];
            if (std::abs(o[a]) >= span[a]) used = false;
          }
          rbuf[(std::size_t(i) * p2 + j) * p3 + k] = used ? lattice_value(o) : 0.0;
        }
    fftw_execute_dft_r2c(fwd, rbuf, khat);
  }

  void apply_fft(const std::vector<double>& w, std::vector<double>& out) const {
    const LatticeInfo& L = *grid->lattice();
    const int p2 = m >= 2 ? pdim[1] : 1, p3 = m >= 3 ? pdim[2] : 1;
    auto pos = [&](std::size_t c) {
      const auto& id = L.index[c];
      const std::size_t i = id[0] - plo[0], j = m >= 2 ? id[1] - plo[1] : 0, k = m >= 3 ? id[2] - plo[2] : 0;
      return (i * p2 + j) * p3 + k;
    };
    std::lock_guard<std::mutex> lock(fft_mutex);
    std::fill(rbuf, rbuf + preal, 0.0);
    for (std::size_t c = 0; c < nl; ++c) rbuf[pos(c)] = w[c];
    fftw_execute_dft_r2c(fwd, rbuf, cbuf);
    for (std::size_t t = 0; t < pcomplex; ++t) {
      const double re = cbuf[t][0] * khat[t][0] - cbuf[t][1] * khat[t][1];
      const double im = cbuf[t][0] * khat[t][1] + cbuf[t][1] * khat[t][0];
      cbuf[t][0] = re;
      cbuf[t][1] = im;
    }
    fftw_execute_dft_c2r(bwd, cbuf, rbuf);
    const double scale = 1.0 / double(preal);
    for (std::size_t c = 0; c < nl; ++c) out[c] = rbuf[pos(c)] * scale;
  }
};

InteractionOperator::InteractionOperator(const KernelConfig& cfg, GridPtr grid, DiagonalRule diag)
    : impl_(std::make_unique<Impl>(cfg, std::move(grid), diag)) {
  Impl& I = *impl_;
  if (!I.grid) throw InvalidInput("operator without grid");
  I.n = I.grid->size();
  I.nl = I.grid->lattice_count();
  I.self.resize(I.n);
  I.is_polar.resize(I.n, 0);
  if (I.nl > 0) {
    const Cell& c0 = I.grid->cell(0);
    I.lattice_self = diag.value(cfg, c0);
  }
  for (std::size_t i = 0; i < I.n; ++i) {
    const Cell& c = I.grid->cell(i);
    I.is_polar[i] = c.shape == CellShape::point ? 1 : 0;
    if (i < I.nl) I.self[i] = I.lattice_self;
    else I.self[i] = I.is_polar[i] ? (diag.mode == DiagonalRule::Mode::exclude ? 0.0 : kInf) : diag.value(cfg, c);
  }
  // polar cells keep 0 on the stored diagonal; apply() handles them
  auto stored_self = [&](std::size_t i) { return I.is_polar[i] ? 0.0 : I.self[i]; };
  if (I.nl >= 1500) {
    I.method = "fft";
    I.build_fft();
    const std::size_t ne = I.n - I.nl;
    I.extras.assign(ne * I.n, 0.0);
    for (std::size_t e = 0; e < ne; ++e)
      for (std::size_t j = 0; j < I.n; ++j) {
        const std::size_t i = I.nl + e;
        I.extras[e * I.n + j] = i == j ? stored_self(i) : I.pair(i, j);
      }
  } else if (I.n <= 4000) {
    I.method = "dense";
    I.dense.assign(I.n * I.n, 0.0);
    for (std::size_t i = 0; i < I.n; ++i) {
      I.dense[i * I.n + i] = stored_self(i);
      for (std::size_t j = i + 1; j < I.n; ++j) {
        const double v = I.pair(i, j);
        I.dense[i * I.n + j] = v;
        I.dense[j * I.n + i] = v;
      }
    }
  } else {
    I.method = "matrix-free";
  }
}

InteractionOperator::~InteractionOperator() = default;

std::size_t InteractionOperator::size() const { return impl_->n; }
const KernelConfig& InteractionOperator::kernel() const { return impl_->cfg; }
const GridPtr& InteractionOperator::grid() const { return impl_->grid; }
const DiagonalRule& InteractionOperator::diagonal_rule() const { return impl_->diag; }
std::string InteractionOperator::method() const { return impl_->method; }
double InteractionOperator::diagonal(std::size_t i) const { return impl_->self[i]; }
bool InteractionOperator::polar(std::size_t i) const { return impl_->is_polar[i] != 0; }

double InteractionOperator::entry(std::size_t i, std::size_t j) const {
  if (i >= impl_->n || j >= impl_->n) throw InvalidInput("operator index out of range");
  return impl_->pair(i, j);
}

void InteractionOperator::apply(const std::vector<double>& w, std::vector<double>& out) const {
  const Impl& I = *impl_;
  if (w.size() != I.n) throw GridMismatch();
  out.assign(I.n, 0.0);
  if (I.method == "dense") {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(I.dense.data(), I.n, I.n);
    Eigen::Map<const Eigen::VectorXd> x(w.data(), I.n);
    Eigen::Map<Eigen::VectorXd> y(out.data(), I.n);
    y.noalias() = A * x;
  } else if (I.method == "fft") {
    I.apply_fft(w, out);
    const std::size_t ne = I.n - I.nl;
    for (std::size_t e = 0; e < ne; ++e) {
      const double* row = &I.extras[e * I.n];
      const double we = w[I.nl + e];
      double acc = 0.0;
      for (std::size_t j = 0; j < I.n; ++j) acc += row[j] * w[j];
      out[I.nl + e] = acc;
      if (we != 0.0)
        for (std::size_t j = 0; j < I.nl; ++j) out[j] += row[j] * we;
    }
  } else {
    for (std::size_t i = 0; i < I.n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < I.n; ++j) {
        if (w[j] == 0.0) continue;
        acc += (i == j ? (I.is_polar[i] ? 0.0 : I.self[i]) : I.pair(i, j)) * w[j];
      }
      out[i] = acc;
    }
  }
  for (std::size_t i = 0; i < I.n; ++i)
    if (I.is_polar[i] && w[i] > 0.0 && I.diag.mode == DiagonalRule::Mode::cell_average) out[i] = kInf;
}

std::vector<double> InteractionOperator::apply(const std::vector<double>& w) const {
  std::vector<double> out;
  apply(w, out);
  return out;
}

std::shared_ptr<const InteractionOperator> interaction_for(const KernelConfig& cfg, const GridPtr& grid,
                                                           const DiagonalRule& diag) {
  struct Entry {
    std::weak_ptr<const GridSet> grid;
    int d;
    double alpha;
    DiagonalRule::Mode mode;
    std::shared_ptr<const InteractionOperator> op;
  };
  static std::mutex mutex;
  static std::list<Entry> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    for (auto it = cache.begin(); it != cache.end(); ++it) {
      auto g = it->grid.lock();
      if (g && g.get() == grid.get() && it->d == cfg.d() && it->alpha == cfg.alpha() && it->mode == diag.mode) {
        cache.splice(cache.begin(), cache, it);
        return cache.front().op;
      }
    }
  }
  auto op = std::make_shared<const InteractionOperator>(cfg, grid, diag);
  std::lock_guard<std::mutex> lock(mutex);
  cache.push_front(Entry{grid, cfg.d(), cfg.alpha(), diag.mode, op});
  // drop expired grids and keep the cache small
  cache.remove_if([](const Entry& e) { return e.grid.expired(); });
  while (cache.size() > 4) cache.pop_back();
  return op;
}

}  // namespace potlab
