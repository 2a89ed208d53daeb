#include "potlab/core/kernel.hpp"

#include <cmath>
#include <string>

#include "potlab/core/errors.hpp"

namespace potlab {

KernelConfig::KernelConfig(int d, double alpha) : d_(d), alpha_(alpha), log_case_(false) {
  if (d < 1 || !(alpha > 0.0)) {
    throw Unsupported("invalid kernel (d=" + std::to_string(d) + ", alpha=" + std::to_string(alpha) + ")");
  }
  if (d == 2 && alpha == 2.0) {
    log_case_ = true;
  } else if (!(alpha < d)) {
    throw Unsupported("kernel requires alpha < d or d = alpha = 2 (got d=" + std::to_string(d) +
                      ", alpha=" + std::to_string(alpha) + ")");
  }
}

double KernelConfig::radial(double r) const {
  if (log_case_) return -2.0 * std::log(r);
  return std::pow(r, alpha_ - d_);
}

double kernel_eval(const KernelConfig& cfg, const Point& x, const Point& y) {
  const double r = distance(x, y);
  if (r == 0.0) throw CoincidentPoints();
  return cfg.radial(r);
}

}  // namespace potlab
