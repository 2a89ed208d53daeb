#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <stdexcept>

namespace potlab {

inline constexpr int kMaxDim = 3;

/// A point of R^m, m <= 3. Lower-dimensional points embed in higher-dimensional
/// spaces by zero padding, so an interval of R can carry the planar log kernel.
struct Point {
  std::array<double, kMaxDim> x{};
  int dim = 0;

  Point() = default;
  Point(std::initializer_list<double> coords) {
    if (coords.size() > kMaxDim) throw std::invalid_argument("point dimension above 3");
    for (double c : coords) x[dim++] = c;
  }
  static Point zero(int d) {
    Point p;
    p.dim = d;
    return p;
  }

  double operator[](int i) const { return x[i]; }
  double& operator[](int i) { return x[i]; }

  double norm() const { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

  friend Point operator+(Point a, const Point& b) {
    for (int i = 0; i < kMaxDim; ++i) a.x[i] += b.x[i];
    if (b.dim > a.dim) a.dim = b.dim;
    return a;
  }
  friend Point operator-(Point a, const Point& b) {
    for (int i = 0; i < kMaxDim; ++i) a.x[i] -= b.x[i];
    if (b.dim > a.dim) a.dim = b.dim;
    return a;
  }
  friend Point operator*(double s, Point a) {
    for (double& c : a.x) c *= s;
    return a;
  }
  friend bool operator==(const Point& a, const Point& b) { return a.x == b.x; }
};

inline double distance(const Point& a, const Point& b) {
  const double dx = a.x[0] - b.x[0];
  const double dy = a.x[1] - b.x[1];
  const double dz = a.x[2] - b.x[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace potlab
