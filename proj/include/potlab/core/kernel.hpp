#pragma once

#include "potlab/core/point.hpp"

namespace potlab {

/// Riesz kernel W(x,y) = |x-y|^(alpha-d) for alpha < d, and the logarithmic
/// kernel W(x,y) = -2 log|x-y| in the planar case d = alpha = 2.
class KernelConfig {
 public:
  /// Validates (d, alpha); throws Unsupported for anything outside alpha < d or d = alpha = 2.
  KernelConfig(int d, double alpha);

  static KernelConfig logarithmic() { return KernelConfig(2, 2.0); }

  int d() const { return d_; }
  double alpha() const { return alpha_; }
  bool log_case() const { return log_case_; }
  /// alpha - d; meaningless in the log case.
  double exponent() const { return alpha_ - d_; }
  /// The domination principle (and with it the envelope machinery) needs alpha <= 2.
  bool domination_regime() const { return alpha_ <= 2.0; }

  /// W as a function of the distance r > 0.
  double radial(double r) const;

  friend bool operator==(const KernelConfig& a, const KernelConfig& b) {
    return a.d_ == b.d_ && a.alpha_ == b.alpha_;
  }

 private:
  int d_;
  double alpha_;
  bool log_case_;
};

/// W(x, y). Throws CoincidentPoints when x == y.
double kernel_eval(const KernelConfig& cfg, const Point& x, const Point& y);

}  // namespace potlab
