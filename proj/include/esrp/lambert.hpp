#pragma once

#include <cmath>
#include <stdexcept>

namespace esrp {

/// Principal branch W0 of the Lambert W function: the w >= -1 with
/// w * exp(w) = x, defined for x >= -1/e.
/// Residual |w*exp(w) - x| stays below 1e-12 * max(1, |x|).
inline double lambert_w0(double x) {
  constexpr double kInvE = 0.36787944117144233;
  if (std::isnan(x) || x < -kInvE * (1 + 8e-16))
    throw std::domain_error("lambert_w0 requires x >= -1/e");
  if (x == 0) return 0;

  double w;
  if (x < -0.25) {
    // series around the branch point in p = sqrt(2*(e*x + 1))
    double q = 2 * (std::exp(1.0) * x + 1);
    double p = std::sqrt(q > 0 ? q : 0);
    w = -1 + p * (1 + p * (-1.0 / 3 + p * (11.0 / 72)));
    if (p < 1e-2) return w;
  } else if (x < 4) {
    w = std::log1p(x);
  } else {
    double l1 = std::log(x);
    double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int i = 0; i < 50; ++i) {
    double ew = std::exp(w);
    double f = w * ew - x;
    if (f == 0) break;
    double wp1 = w + 1;
    double denom = ew * wp1 - (w + 2) * f / (2 * wp1);
    double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 2e-16 * (1 + std::abs(w))) break;
  }
  return w;
}

/// W0(exp(log_x)) without forming exp(log_x); usable far beyond the overflow
/// threshold. For large arguments solves w + log(w) = log_x by Newton steps.
inline double lambert_w0_exp(double log_x) {
  if (log_x <= 700) return lambert_w0(std::exp(log_x));
  double w = log_x - std::log(log_x);
  for (int i = 0; i < 20; ++i) {
    double dw = w * (log_x - w - std::log(w)) / (w + 1);
    w += dw;
    if (std::abs(dw) <= 2e-16 * w) break;
  }
  return w;
}

}  // namespace esrp
