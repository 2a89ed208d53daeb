#include "potlab/core/cell_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "potlab/core/errors.hpp"
#include "potlab/core/quadrature.hpp"

namespace potlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const Point& a, const Point& b) { return a.x[0] * b.x[0] + a.x[1] * b.x[1] + a.x[2] * b.x[2]; }

// second derivative of the radial profile, used for small-cell corrections
double radial_dd(const KernelConfig& cfg, double r) {
  if (cfg.log_case()) return 2.0 / (r * r);
  const double p = cfg.exponent();
  return p * (p - 1.0) * std::pow(r, p - 2.0);
}

// Integral over rho in [0,1] of rho^(k-1) * f(rho * n), times nothing else.
double radial_moment(const KernelConfig& cfg, int k, double n) {
  if (cfg.log_case()) return -2.0 * std::log(n) / k + 2.0 / (double(k) * k);
  const double p = cfg.exponent();
  if (k + p <= 0.0) throw Unsupported("kernel not integrable on cells of this dimension");
  return std::pow(n, p) / (k + p);
}

// Integral of f(|t|) over the box [0,a_1]x...x[0,a_k] (a_i >= 0).
double vertex_box_integral(const KernelConfig& cfg, int k, const double* a) {
  double vol = 1.0;
  for (int i = 0; i < k; ++i) {
    if (a[i] <= 0.0) return 0.0;
    vol *= a[i];
  }
  if (k == 1) return vol * radial_moment(cfg, 1, a[0]);
  const QuadratureRule& gl = gauss_legendre(k == 2 ? 24 : 14);
  const int q = int(gl.nodes.size());
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    // pyramid where tau_j is the largest coordinate
    int others[2], no = 0;
    for (int i = 0; i < k; ++i)
      if (i != j) others[no++] = i;
    if (k == 2) {
      for (int u = 0; u < q; ++u) {
        const double z = 0.5 * (gl.nodes[u] + 1.0), wz = 0.5 * gl.weights[u];
        const double n = std::hypot(a[j], a[others[0]] * z);
        total += wz * radial_moment(cfg, 2, n);
      }
    } else {
      for (int u = 0; u < q; ++u) {
        const double z1 = 0.5 * (gl.nodes[u] + 1.0), w1 = 0.5 * gl.weights[u];
        for (int v = 0; v < q; ++v) {
          const double z2 = 0.5 * (gl.nodes[v] + 1.0), w2 = 0.5 * gl.weights[v];
          const double e0 = a[j], e1 = a[others[0]] * z1, e2 = a[others[1]] * z2;
          const double n = std::sqrt(e0 * e0 + e1 * e1 + e2 * e2);
          total += w1 * w2 * radial_moment(cfg, 3, n);
        }
      }
    }
  }
  // pyramid integrals are in tau coordinates scaled by the extents
  return vol * total;
}

// Polynomial product of (a_i + b_i rho) factors, coefficients in rho.
void poly_mul_linear(std::vector<double>& c, double a, double b) {
  std::vector<double> out(c.size() + 1, 0.0);
  for (std::size_t m = 0; m < c.size(); ++m) {
    out[m] += a * c[m];
    out[m + 1] += b * c[m];
  }
  c.swap(out);
}

double rho_moment_poly(const KernelConfig& cfg, int k, const std::vector<double>& c, double hn) {
  double total = 0.0;
  if (cfg.log_case()) {
    const double lg = std::log(hn);
    for (std::size_t m = 0; m < c.size(); ++m) {
      const double e = k + double(m);
      total += c[m] * (-2.0 * lg / e + 2.0 / (e * e));
    }
  } else {
    const double p = cfg.exponent();
    const double s = std::pow(hn, p);
    for (std::size_t m = 0; m < c.size(); ++m) total += c[m] * s / (k + double(m) + p);
  }
  return total;
}

// Distance density of two uniform points in the unit k-ball (k = 1: segment [-1,1]).
double unit_ball_distance_pdf(int k, double t) {
  if (t <= 0.0 || t >= 2.0) return 0.0;
  switch (k) {
    case 1:
      return 0.5 * (2.0 - t);
    case 2:
      return (4.0 * t / std::numbers::pi) * std::acos(0.5 * t) - (t * t / std::numbers::pi) * std::sqrt(4.0 - t * t);
    case 3:
      return 3.0 * t * t * (1.0 - 0.75 * t + t * t * t / 16.0);
    default:
      throw Unsupported("ball dimension above 3");
  }
}

// Self mean of a uniform k-ball of radius a; k = 2 covers flat disks in R^3.
double ball_self_mean(const KernelConfig& cfg, int k, double a) {
  if (cfg.log_case()) {
    double unit;
    if (k == 1) unit = 3.0 - 2.0 * std::log(2.0);
    else if (k == 2) unit = 0.5;
    else unit = integrate_singular([&](double t) { return -2.0 * std::log(t) * unit_ball_distance_pdf(k, t); }, 0.0, 2.0);
    return -2.0 * std::log(a) + unit;
  }
  const double p = cfg.exponent();
  if (k + p <= 0.0) throw Unsupported("kernel not integrable on cells of this dimension");
  if (k == 1) return 2.0 * std::pow(2.0 * a, p) / ((p + 1.0) * (p + 2.0));
  if (k == 3 && p == -1.0) return 6.0 / (5.0 * a);
  const double unit =
      integrate_singular([&](double t) { return std::pow(t, p) * unit_ball_distance_pdf(k, t); }, 0.0, 2.0);
  return std::pow(a, p) * unit;
}

// Antiderivatives along a line: F' = g and G'' = g for g(u) = f(|u|).
double line_F(const KernelConfig& cfg, double u) {
  if (u == 0.0) return 0.0;
  if (cfg.log_case()) return -2.0 * (u * std::log(std::abs(u)) - u);
  const double p = cfg.exponent();
  return std::copysign(std::pow(std::abs(u), p + 1.0) / (p + 1.0), u);
}

double line_G(const KernelConfig& cfg, double u) {
  if (u == 0.0) return 0.0;
  if (cfg.log_case()) return -u * u * std::log(std::abs(u)) + 1.5 * u * u;
  const double p = cfg.exponent();
  return std::pow(std::abs(u), p + 2.0) / ((p + 1.0) * (p + 2.0));
}

// Undo the scaling of lengths by s: W(s r) = W(r) - 2 log s, or s^p W(r).
double unscale(const KernelConfig& cfg, double mean_scaled, double s) {
  if (cfg.log_case()) return mean_scaled - 2.0 * std::log(s);
  return std::pow(s, cfg.exponent()) * mean_scaled;
}

struct Node {
  Point x;
  double w;
};

double radial_d(const KernelConfig& cfg, double r) {
  if (cfg.log_case()) return -2.0 / r;
  const double p = cfg.exponent();
  return p * std::pow(r, p - 1.0);
}

// Covariance matrix of a uniform point of the cell.
std::array<std::array<double, 3>, 3> cell_covariance(const Cell& c) {
  std::array<std::array<double, 3>, 3> S{};
  const int k = c.center.dim;
  switch (c.shape) {
    case CellShape::cube:
      for (int i = 0; i < k; ++i) S[i][i] = c.size * c.size / 12.0;
      break;
    case CellShape::segment:
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) S[i][j] = c.size * c.size / 12.0 * c.axis[i] * c.axis[j];
      break;
    case CellShape::patch: {
      const double a2 = c.size * c.size / std::numbers::pi;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) S[i][j] = a2 / 4.0 * ((i == j ? 1.0 : 0.0) - c.axis[i] * c.axis[j]);
      break;
    }
    case CellShape::ball:
      for (int i = 0; i < k; ++i) S[i][i] = c.size * c.size / (k + 2.0);
      break;
    case CellShape::point:
      break;
  }
  return S;
}

// E f(|D + X - Y|) to second order in the cell extents.
double far_mean(const KernelConfig& cfg, const Point& d, const std::array<std::array<double, 3>, 3>& S) {
  const double r = d.norm();
  const double u[3] = {d[0] / r, d[1] / r, d[2] / r};
  double uSu = 0.0, tr = 0.0;
  for (int i = 0; i < 3; ++i) {
    tr += S[i][i];
    for (int j = 0; j < 3; ++j) uSu += u[i] * S[i][j] * u[j];
  }
  return cfg.radial(r) + 0.5 * (radial_dd(cfg, r) * uSu + radial_d(cfg, r) / r * (tr - uSu));
}

void orthonormal_frame(const Point& n, Point& e1, Point& e2) {
  Point t = std::abs(n[0]) < 0.9 ? Point{1.0, 0.0, 0.0} : Point{0.0, 1.0, 0.0};
  const double tn = dot(t, n);
  e1 = t - tn * n;
  e1 = (1.0 / e1.norm()) * e1;
  e2 = Point{n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]};
}

void gl01(int q, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  QuadratureRule r = gauss_legendre(q, a, b);
  x = std::move(r.nodes);
  w = std::move(r.weights);
}

// Probability quadrature rule on the cell (weights sum to 1).
std::vector<Node> cell_rule(const Cell& c, int q) {
  std::vector<Node> out;
  const int k = c.center.dim;
  switch (c.shape) {
    case CellShape::point:
      out.push_back({c.center, 1.0});
      break;
    case CellShape::cube: {
      std::vector<double> x, w;
      gl01(q, -0.5 * c.size, 0.5 * c.size, x, w);
      const double vol = 1.0 / c.size;
      const int n1 = q, n2 = k >= 2 ? q : 1, n3 = k >= 3 ? q : 1;
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
          for (int l = 0; l < n3; ++l) {
            Point p = c.center;
            p[0] += x[i];
            double wt = w[i] * vol;
            if (k >= 2) {
              p[1] += x[j];
              wt *= w[j] * vol;
            }
            if (k >= 3) {
              p[2] += x[l];
              wt *= w[l] * vol;
            }
            out.push_back({p, wt});
          }
      break;
    }
    case CellShape::segment: {
      std::vector<double> x, w;
      gl01(q, -0.5 * c.size, 0.5 * c.size, x, w);
      for (int i = 0; i < q; ++i) out.push_back({c.center + x[i] * c.axis, w[i] / c.size});
      break;
    }
    case CellShape::patch:
    case CellShape::ball: {
      const bool flat = c.shape == CellShape::patch || k == 2;
      const double a = c.shape == CellShape::patch ? c.size / std::sqrt(std::numbers::pi) : c.size;
      if (c.shape == CellShape::ball && k == 1) {
        std::vector<double> x, w;
        gl01(q, -a, a, x, w);
        for (int i = 0; i < q; ++i) {
          Point p = c.center;
          p[0] += x[i];
          out.push_back({p, w[i] / (2.0 * a)});
        }
      } else if (flat) {
        Point e1{1.0, 0.0}, e2{0.0, 1.0};
        if (c.shape == CellShape::patch) orthonormal_frame(c.axis, e1, e2);
        std::vector<double> r, wr;
        gl01(q, 0.0, a, r, wr);
        const int nt = 2 * q;
        for (int i = 0; i < q; ++i)
          for (int j = 0; j < nt; ++j) {
            const double th = 2.0 * std::numbers::pi * (j + 0.5) / nt;
            const Point p = c.center + (r[i] * std::cos(th)) * e1 + (r[i] * std::sin(th)) * e2;
            out.push_back({p, wr[i] * 2.0 * r[i] / (a * a) / nt});
          }
      } else {
        std::vector<double> r, wr, ct, wc;
        gl01(q, 0.0, a, r, wr);
        gl01(q, -1.0, 1.0, ct, wc);
        const int np = 2 * q;
        for (int i = 0; i < q; ++i)
          for (int j = 0; j < q; ++j)
            for (int l = 0; l < np; ++l) {
              const double st = std::sqrt(1.0 - ct[j] * ct[j]);
              const double ph = 2.0 * std::numbers::pi * (l + 0.5) / np;
              Point p = c.center;
              p[0] += r[i] * st * std::cos(ph);
              p[1] += r[i] * st * std::sin(ph);
              p[2] += r[i] * ct[j];
              out.push_back({p, wr[i] * 3.0 * r[i] * r[i] / (a * a * a) * 0.5 * wc[j] / np});
            }
      }
      break;
    }
  }
  return out;
}

double quadrature_point_mean(const KernelConfig& cfg, const Cell& c, const Point& x, int q) {
  double total = 0.0;
  for (const Node& n : cell_rule(c, q)) {
    const double r = distance(n.x, x);
    if (r > 0.0) total += n.w * cfg.radial(r);
  }
  return total;
}

int order_for(double size, double dist) {
  if (dist <= 0.0) return 16;
  const double ratio = size / dist;
  if (ratio < 0.1) return 3;
  if (ratio < 0.3) return 5;
  if (ratio < 0.7) return 8;
  return 12;
}

// Mean over a flat disk of radius a of f(|x - y|), where x has in-plane offset e
// from the centre and height z above the plane.
double disk_point_mean(const KernelConfig& cfg, double a, double e, double z) {
  // radial antiderivative: int_0^R f(sqrt(rho^2 + z^2)) rho d rho
  auto A = [&](double R) {
    const double s2 = R * R + z * z, z2 = z * z;
    if (cfg.log_case()) {
      auto h = [](double u) { return u > 0.0 ? u * std::log(u) - u : 0.0; };
      return -0.5 * (h(s2) - h(z2));
    }
    const double p = cfg.exponent();
    if (p == -2.0) return 0.5 * (std::log(s2) - std::log(z2));
    if (p == -1.0) return std::sqrt(s2) - std::sqrt(z2);
    return (std::pow(s2, 0.5 * (p + 2.0)) - (z2 > 0.0 ? std::pow(z2, 0.5 * (p + 2.0)) : 0.0)) / (p + 2.0);
  };
  const double area = std::numbers::pi * a * a;
  if (e == 0.0) return 2.0 * std::numbers::pi * A(a) / area;
  const QuadratureRule& gl = gauss_legendre(64);
  double total = 0.0;
  if (e < a) {
    // polar coordinates about the foot of x, which lies inside the disk
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double th = std::numbers::pi * (gl.nodes[i] + 1.0) * 0.5;
      const double R = -e * std::cos(th) + std::sqrt(a * a - e * e * std::sin(th) * std::sin(th));
      total += gl.weights[i] * 0.5 * std::numbers::pi * A(R);
    }
    return 2.0 * total / area;
  }
  const double tmax = std::asin(std::min(1.0, a / e));
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double th = tmax * gl.nodes[i];
    const double s = std::sin(th), cs = std::cos(th);
    const double disc = std::sqrt(std::max(0.0, a * a - e * e * s * s));
    total += gl.weights[i] * tmax * (A(e * cs + disc) - A(e * cs - disc));
  }
  return total / area;
}

// Mean over a k-cube centred at c of edge h, x anywhere in the subspace of the cube.
double cube_point_mean_exact(const KernelConfig& cfg, int k, double h, const Point& rel) {
  double total = 0.0;
  const int ncorner = 1 << k;
  for (int m = 0; m < ncorner; ++m) {
    double a[3];
    double sign = 1.0;
    for (int i = 0; i < k; ++i) {
      const bool hi = (m >> i) & 1;
      const double corner = hi ? 0.5 * h : -0.5 * h;
      const double ext = corner - rel[i];
      a[i] = std::abs(ext);
      // int_{lo}^{hi} = int_x^{hi} - int_x^{lo}, and int_x^c = sgn(c-x) int_0^|c-x|
      const double s = ext >= 0.0 ? 1.0 : -1.0;
      sign *= hi ? s : -s;
    }
    total += sign * vertex_box_integral(cfg, k, a);
  }
  return total / std::pow(h, k);
}

}  // namespace

// ---------------------------------------------------------------------------

double Cell::volume() const {
  const int k = center.dim;
  switch (shape) {
    case CellShape::cube:
      return std::pow(size, k);
    case CellShape::segment:
      return size;
    case CellShape::patch:
      return size * size;
    case CellShape::ball:
      if (k == 1) return 2.0 * size;
      if (k == 2) return std::numbers::pi * size * size;
      return 4.0 / 3.0 * std::numbers::pi * size * size * size;
    case CellShape::point:
      return 0.0;
  }
  return 0.0;
}

double Cell::radius() const {
  switch (shape) {
    case CellShape::cube:
      return 0.5 * size * std::sqrt(double(center.dim));
    case CellShape::segment:
      return 0.5 * size;
    case CellShape::patch:
      return size / std::sqrt(std::numbers::pi);
    case CellShape::ball:
      return size;
    case CellShape::point:
      return 0.0;
  }
  return 0.0;
}

int Cell::intrinsic_dim() const {
  switch (shape) {
    case CellShape::cube:
    case CellShape::ball:
      return center.dim;
    case CellShape::segment:
      return 1;
    case CellShape::patch:
      return 2;
    case CellShape::point:
      return 0;
  }
  return 0;
}

bool Cell::contains(const Point& x, double slack) const {
  const Point rel = x - center;
  const double tol = slack * std::max(size, 1e-300);
  switch (shape) {
    case CellShape::point:
      return rel.norm() <= tol;
    case CellShape::cube:
      for (int i = 0; i < kMaxDim; ++i) {
        const double lim = i < center.dim ? 0.5 * size + tol : tol;
        if (std::abs(rel[i]) > lim) return false;
      }
      return true;
    case CellShape::segment: {
      const double t = dot(rel, axis);
      return std::abs(t) <= 0.5 * size + tol && (rel - t * axis).norm() <= tol;
    }
    case CellShape::patch: {
      const double t = dot(rel, axis);
      return std::abs(t) <= tol && (rel - t * axis).norm() <= radius() + tol;
    }
    case CellShape::ball: {
      for (int i = center.dim; i < kMaxDim; ++i)
        if (std::abs(rel[i]) > tol) return false;
      return rel.norm() <= size + tol;
    }
  }
  return false;
}

std::string to_string(CellShape s) {
  switch (s) {
    case CellShape::cube:
      return "cube";
    case CellShape::segment:
      return "segment";
    case CellShape::patch:
      return "patch";
    case CellShape::ball:
      return "ball";
    case CellShape::point:
      return "point";
  }
  return "cube";
}

CellShape shape_from_string(const std::string& s) {
  if (s == "cube") return CellShape::cube;
  if (s == "segment") return CellShape::segment;
  if (s == "patch") return CellShape::patch;
  if (s == "ball") return CellShape::ball;
  if (s == "point") return CellShape::point;
  throw InvalidInput("unknown cell shape '" + s + "'");
}

// ---------------------------------------------------------------------------

double cube_pair_mean(const KernelConfig& cfg, int k, double h, const std::array<int, 3>& offset) {
  if (k < 1 || k > 3) throw Unsupported("cube dimension must be 1, 2 or 3");
  if (!cfg.log_case() && k + cfg.exponent() <= 0.0)
    throw Unsupported("kernel not integrable on cells of this dimension");
  int amax = 0;
  for (int i = 0; i < k; ++i) amax = std::max(amax, std::abs(offset[i]));
  if (k == 1 && amax >= 1) {
    // closed form in one dimension
    return collinear_mean(cfg, h, h, h * std::abs(offset[0]));
  }
  const int q = amax <= 2 ? 12 : (amax <= 5 ? 6 : 4);
  const QuadratureRule& gl = gauss_legendre(q);
  const QuadratureRule& glz = gauss_legendre(k == 2 ? 20 : 12);
  double total = 0.0;
  const int nsub = 1 << k;
  for (int sub = 0; sub < nsub; ++sub) {
    bool hi[3];
    bool singular = true;
    for (int i = 0; i < k; ++i) {
      hi[i] = (sub >> i) & 1;
      const int v = -offset[i];
      const bool in = hi[i] ? (v == 0 || v == 1) : (v == 0 || v == -1);
      singular = singular && in;
    }
    if (!singular) {
      // tensor Gauss on the unit subcube
      const int n2 = k >= 2 ? q : 1, n3 = k >= 3 ? q : 1;
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < n2; ++b)
          for (int c = 0; c < n3; ++c) {
            const int idx[3] = {a, b, c};
            double w = 1.0, r2 = 0.0;
            for (int i = 0; i < k; ++i) {
              const double t = 0.5 * (gl.nodes[idx[i]] + 1.0);
              const double s = hi[i] ? t : -t;
              w *= 0.5 * gl.weights[idx[i]] * (1.0 - t);
              const double u = offset[i] + s;
              r2 += u * u;
            }
            total += w * cfg.radial(h * std::sqrt(r2));
          }
      continue;
    }
    // the singular point s = -offset is a vertex of this subcube: s_i = v_i + sigma_i t_i
    double ca[3], cb[3];
    for (int i = 0; i < k; ++i) {
      const double v = -offset[i];
      const double sigma = hi[i] ? (v == 0 ? 1.0 : -1.0) : (v == 0 ? -1.0 : 1.0);
      // weight factor 1 - |s| is 1 + s on the low half and 1 - s on the high half
      if (hi[i]) {
        ca[i] = 1.0 - v;
        cb[i] = -sigma;
      } else {
        ca[i] = 1.0 + v;
        cb[i] = sigma;
      }
    }
    for (int j = 0; j < k; ++j) {
      int others[2], no = 0;
      for (int i = 0; i < k; ++i)
        if (i != j) others[no++] = i;
      const int nz1 = k >= 2 ? int(glz.nodes.size()) : 1;
      const int nz2 = k >= 3 ? int(glz.nodes.size()) : 1;
      for (int u = 0; u < nz1; ++u)
        for (int v = 0; v < nz2; ++v) {
          double zeta[3] = {0, 0, 0};
          double wz = 1.0;
          zeta[j] = 1.0;
          if (k >= 2) {
            zeta[others[0]] = 0.5 * (glz.nodes[u] + 1.0);
            wz *= 0.5 * glz.weights[u];
          }
          if (k >= 3) {
            zeta[others[1]] = 0.5 * (glz.nodes[v] + 1.0);
            wz *= 0.5 * glz.weights[v];
          }
          std::vector<double> poly{1.0};
          double n2 = 0.0;
          for (int i = 0; i < k; ++i) {
            poly_mul_linear(poly, ca[i], cb[i] * zeta[i]);
            n2 += zeta[i] * zeta[i];
          }
          total += wz * rho_moment_poly(cfg, k, poly, h * std::sqrt(n2));
        }
    }
  }
  return total;
}

double collinear_mean(const KernelConfig& cfg, double l1, double l2, double D) {
  D = std::abs(D);
  const double lmax = std::max(l1, l2);
  if (lmax <= 0.0) {
    if (D == 0.0) throw CoincidentPoints();
    return cfg.radial(D);
  }
  if (lmax <= 1e-4 * D) return cfg.radial(D) + radial_dd(cfg, D) * (l1 * l1 + l2 * l2) / 24.0;
  // work in units of the larger length
  const double s = lmax;
  const double a = l1 / s, b = l2 / s, d = D / s;
  const double lmin = std::min(a, b);
  double mean;
  if (d > 4.0) {
    const QuadratureRule& gl = gauss_legendre(10);
    mean = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
      for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
        const double u = d + 0.5 * a * gl.nodes[i] - 0.5 * b * gl.nodes[j];
        mean += 0.25 * gl.weights[i] * gl.weights[j] * cfg.radial(std::abs(u));
      }
  } else if (lmin < 1e-7) {
    // the shorter one is a point as far as the longer is concerned
    const double L = std::max(a, b);
    const double x = d, lo = -0.5 * L, hi = 0.5 * L;
    mean = (line_F(cfg, x - lo) - line_F(cfg, x - hi)) / L;
    if (!cfg.log_case() && cfg.exponent() <= -1.0 && std::abs(x) <= 0.5 * L)
      throw Unsupported("kernel not integrable on segments");
  } else {
    const double a1 = d - 0.5 * a, b1 = d + 0.5 * a, a2 = -0.5 * b, b2 = 0.5 * b;
    if (!cfg.log_case() && cfg.exponent() <= -1.0 && a1 <= b2) throw Unsupported("kernel not integrable on segments");
    mean = (line_G(cfg, b1 - a2) + line_G(cfg, a1 - b2) - line_G(cfg, b1 - b2) - line_G(cfg, a1 - a2)) / (a * b);
  }
  return unscale(cfg, mean, s);
}

double point_segment_mean(const KernelConfig& cfg, double l, double t) {
  const double D = std::abs(t);
  if (l <= 0.0) {
    if (D == 0.0) throw CoincidentPoints();
    return cfg.radial(D);
  }
  if (l <= 1e-4 * D) return cfg.radial(D) + radial_dd(cfg, D) * l * l / 24.0;
  const double x = D / l;
  if (!cfg.log_case() && cfg.exponent() <= -1.0 && x <= 0.5) throw Unsupported("kernel not integrable on segments");
  const double mean = line_F(cfg, x + 0.5) - line_F(cfg, x - 0.5);
  return unscale(cfg, mean, l);
}

double cell_self_mean(const KernelConfig& cfg, const Cell& c) {
  switch (c.shape) {
    case CellShape::point:
      return kInf;
    case CellShape::cube:
      return cube_pair_mean(cfg, c.center.dim, c.size, {0, 0, 0});
    case CellShape::segment:
      return collinear_mean(cfg, c.size, c.size, 0.0);
    case CellShape::patch:
      return ball_self_mean(cfg, 2, c.size / std::sqrt(std::numbers::pi));
    case CellShape::ball:
      return ball_self_mean(cfg, c.center.dim, c.size);
  }
  return kInf;
}

double cell_point_mean(const KernelConfig& cfg, const Cell& c, const Point& x) {
  const Point rel = x - c.center;
  const double dist = rel.norm();
  const double rad = c.radius();
  if (c.shape == CellShape::point) {
    if (dist == 0.0) throw CoincidentPoints();
    return cfg.radial(dist);
  }
  const int k = c.center.dim;
  double off_sub = 0.0;  // distance of x from the subspace spanned by the cell
  for (int i = k; i < kMaxDim; ++i) off_sub += rel[i] * rel[i];
  off_sub = std::sqrt(off_sub);
  if (c.shape == CellShape::ball && k == 1 && off_sub == 0.0) return point_segment_mean(cfg, 2.0 * c.size, rel[0]);
  if (dist > 4.0 * rad) return far_mean(cfg, rel, cell_covariance(c));
  switch (c.shape) {
    case CellShape::cube:
      if (off_sub == 0.0 && dist <= 2.0 * c.size * std::sqrt(double(k))) return cube_point_mean_exact(cfg, k, c.size, rel);
      return quadrature_point_mean(cfg, c, x, order_for(2.0 * rad, std::max(dist - rad, off_sub)));
    case CellShape::segment: {
      const double t = dot(rel, c.axis);
      const double perp = (rel - t * c.axis).norm();
      if (perp <= 1e-14 * c.size) return point_segment_mean(cfg, c.size, t);
      if (cfg.log_case()) {
        // -int log(s^2 + z^2) ds = -(s log(s^2+z^2) - 2 s + 2 z atan(s / z))
        auto P = [&](double s) { return -(s * std::log(s * s + perp * perp) - 2.0 * s + 2.0 * perp * std::atan(s / perp)); };
        return (P(0.5 * c.size - t) - P(-0.5 * c.size - t)) / c.size;
      }
      auto g = [&](double s) { return cfg.radial(std::hypot(s, perp)); };
      const double lo = -0.5 * c.size - t, hi = 0.5 * c.size - t;
      double total = 0.0;
      if (lo < 0.0 && hi > 0.0) total = integrate_singular(g, lo, 0.0) + integrate_singular(g, 0.0, hi);
      else total = integrate_singular(g, lo, hi);
      return total / c.size;
    }
    case CellShape::patch: {
      const double z = dot(rel, c.axis);
      const double e = (rel - z * c.axis).norm();
      return disk_point_mean(cfg, c.size / std::sqrt(std::numbers::pi), e, std::abs(z));
    }
    case CellShape::ball: {
      const double R = c.size;
      if (k == 1) {
        if (off_sub == 0.0) return point_segment_mean(cfg, 2.0 * R, rel[0]);
        Cell seg{c.center, CellShape::segment, 2.0 * R, Point{1.0, 0.0, 0.0}};
        return cell_point_mean(cfg, seg, x);
      }
      if (k == 2) {
        if (cfg.log_case() && off_sub == 0.0) {
          if (dist >= R) return cfg.radial(dist);
          return -2.0 * std::log(R) + 1.0 - dist * dist / (R * R);
        }
        double e = std::hypot(rel[0], rel[1]);
        return disk_point_mean(cfg, R, e, off_sub);
      }
      if (cfg.exponent() == -1.0 && cfg.d() == 3) {
        if (dist >= R) return 1.0 / dist;
        return (3.0 * R * R - dist * dist) / (2.0 * R * R * R);
      }
      return quadrature_point_mean(cfg, c, x, order_for(2.0 * R, std::max(dist - R, 0.0)));
    }
    case CellShape::point:
      break;
  }
  return cfg.radial(dist);
}

double cell_pair_mean(const KernelConfig& cfg, const Cell& a, const Cell& b) {
  const double dist = distance(a.center, b.center);
  const double ra = a.radius(), rb = b.radius();
  if (a.shape == CellShape::point && b.shape == CellShape::point) {
    if (dist == 0.0) throw CoincidentPoints();
    return cfg.radial(dist);
  }
  if (a.shape == CellShape::point) return cell_point_mean(cfg, b, a.center);
  if (b.shape == CellShape::point) return cell_point_mean(cfg, a, b.center);
  // same-size cubes on a common lattice
  if (a.shape == CellShape::cube && b.shape == CellShape::cube && a.size == b.size && a.center.dim == b.center.dim) {
    std::array<int, 3> off{0, 0, 0};
    bool aligned = true;
    for (int i = 0; i < kMaxDim; ++i) {
      const double o = (b.center[i] - a.center[i]) / a.size;
      const double r = std::round(o);
      if (i >= a.center.dim) {
        if (std::abs(b.center[i] - a.center[i]) > 1e-12 * a.size) aligned = false;
        continue;
      }
      if (std::abs(o - r) > 1e-9) aligned = false;
      off[i] = int(r);
    }
    if (aligned) {
      int amax = 0;
      for (int i = 0; i < a.center.dim; ++i) amax = std::max(amax, std::abs(off[i]));
      if (amax <= 8) return cube_pair_mean(cfg, a.center.dim, a.size, off);
    }
  }
  if (a.shape == CellShape::ball && b.shape == CellShape::ball && a.center.dim == b.center.dim) {
    const int k = a.center.dim;
    bool in_sub = true;
    for (int i = k; i < kMaxDim; ++i)
      if (a.center[i] != b.center[i]) in_sub = false;
    if (k == 1 && in_sub) return collinear_mean(cfg, 2.0 * a.size, 2.0 * b.size, b.center[0] - a.center[0]);
    const bool log2 = k == 2 && cfg.log_case() && in_sub;
    const bool newton3 = k == 3 && cfg.d() == 3 && cfg.exponent() == -1.0;
    if (log2 || newton3) {
      if (dist >= ra + rb) return cfg.radial(dist);
      const double big = std::max(ra, rb), small = std::min(ra, rb);
      if (dist + small <= big) {
        if (log2) return -2.0 * std::log(big) + 1.0 - (dist * dist + 0.5 * small * small) / (big * big);
        return (3.0 * big * big - (dist * dist + 0.6 * small * small)) / (2.0 * big * big * big);
      }
    }
  }
  if (dist > 4.0 * (ra + rb)) {
    auto S = cell_covariance(a);
    const auto Sb = cell_covariance(b);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) S[i][j] += Sb[i][j];
    return far_mean(cfg, b.center - a.center, S);
  }
  // quadrature over the larger cell, semi-analytic means over the smaller
  const Cell& outer = ra >= rb ? a : b;
  const Cell& inner = ra >= rb ? b : a;
  const int q = order_for(2.0 * std::max(ra, rb), std::max(dist - ra - rb, 0.0));
  double total = 0.0;
  for (const Node& n : cell_rule(outer, q)) total += n.w * cell_point_mean(cfg, inner, n.x);
  return total;
}

double cube_far_mean(const KernelConfig& cfg, int k, double h, const std::array<int, 3>& offset) {
  Cell c{Point::zero(k), CellShape::cube, h, Point{}};
  auto S = cell_covariance(c);
  for (auto& row : S)
    for (double& v : row) v *= 2.0;
  Point d = Point::zero(k);
  for (int i = 0; i < k; ++i) d[i] = h * offset[i];
  return far_mean(cfg, d, S);
}

}  // namespace potlab
