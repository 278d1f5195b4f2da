#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"
#include "quadrature.hpp"

namespace esrp {

/// Raised at MomentParams construction with every violated order collected.
class StabilityError : public std::domain_error {
 public:
  explicit StabilityError(std::vector<int> orders)
      : std::domain_error(message(orders)), orders_(std::move(orders)) {}

  const std::vector<int>& orders() const { return orders_; }

 private:
  static std::string message(const std::vector<int>& orders) {
    std::string s = "stability violated: psi_k <= 0 for k =";
    for (int k : orders) s += ' ' + std::to_string(k);
    return s;
  }
  std::vector<int> orders_;
};

/// Jump-moment constants m_k and relaxation rates psi_k = k*beta - rho*m_k^E
/// for orders 1..K. Construction evaluates every order once and reports all
/// stability violations together; external moments are never touched when
/// rho = 0, so an external jump law with divergent moments is harmless there.
class MomentParams {
 public:
  MomentParams(const ModelParams& p, int max_order) {
    if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");
    validate(p);
    if (p.lambda0 != 1.0)
      throw std::invalid_argument(
          "moment formulas require lambda0 = 1; rescaling is not supported");
    m_self_.reserve(max_order);
    m_ext_.reserve(max_order);
    psi_.reserve(max_order);
    for (int k = 1; k <= max_order; ++k) {
      m_self_.push_back(p.jump_self.exp_moment(k));
      m_ext_.push_back(p.rho > 0 ? p.jump_ext.exp_moment(k) : 0.0);
      psi_.push_back(k * p.beta - p.rho * m_ext_.back());
    }
    std::vector<int> bad;
    for (int k = 1; k <= max_order; ++k)
      if (!(psi_[k - 1] > 0)) bad.push_back(k);
    if (!bad.empty()) throw StabilityError(std::move(bad));
  }

  int max_order() const { return static_cast<int>(psi_.size()); }
  double m_self(int k) const { return m_self_.at(k - 1); }
  double m_ext(int k) const { return m_ext_.at(k - 1); }
  double psi(int k) const { return psi_.at(k - 1); }

 private:
  std::vector<double> m_self_, m_ext_, psi_;
};

/// First reciprocal moment E[lambda_t^{-1}]:
///   theta1(t) = e^{-psi1 t} + (m1/psi1)(1 - e^{-psi1 t}).
inline double theta1(const ModelParams& p, double t) {
  if (!(t >= 0)) throw std::invalid_argument("t must be nonnegative");
  MomentParams mp(p, 1);
  double decay = std::exp(-mp.psi(1) * t);
  return decay + mp.m_self(1) / mp.psi(1) * (1 - decay);
}

/// Second reciprocal moment E[lambda_t^{-2}] in closed form. The difference
/// quotient (e^{-psi1 t} - e^{-psi2 t}) / (psi2 - psi1) switches to its
/// analytic limit t*e^{-psi1 t} when psi2 approaches psi1, keeping the value
/// continuous in the parameters.
inline double theta2(const ModelParams& p, double t) {
  if (!(t >= 0)) throw std::invalid_argument("t must be nonnegative");
  MomentParams mp(p, 2);
  double psi1 = mp.psi(1), psi2 = mp.psi(2);
  double e1 = std::exp(-psi1 * t), e2 = std::exp(-psi2 * t);
  double ratio = mp.m_self(1) / psi1;
  bool degenerate = std::abs(psi2 - psi1) < 1e-8 * std::max(psi1, psi2);
  double slope = degenerate ? t * e1 : (e1 - e2) / (psi2 - psi1);
  return e2 + mp.m_self(2) * (ratio * (1 - e2) / psi2 + (1 - ratio) * slope);
}

/// Reciprocal-moment curve of order k, either closed form or integrated.
struct MomentCurve {
  std::vector<double> times;
  std::vector<double> values;
  int order = 1;
  enum class Source { theory, monte_carlo } source = Source::theory;
  std::vector<double> ci_half_width;  ///< 95% half-widths, monte_carlo only
};

namespace detail {

// One cascade level: v(t) = e^{-psi t} v(0) + m * int_0^t e^{-psi(t-s)} f(s) ds
// with v(0) = 1, marched over equal panels so every quadrature carries its
// exponential weight with nonpositive exponent.
template <class Prev>
PiecewiseChebyshev cascade_level(Prev&& prev, double psi, double m,
                                 double tmax) {
  int n_panels = std::max(
      16, std::min(512, static_cast<int>(std::ceil(tmax * (psi + 0.5)))));
  double width = tmax / n_panels;
  std::vector<double> at_panel(n_panels + 1);
  at_panel[0] = 1.0;
  for (int i = 0; i < n_panels; ++i) {
    double lo = i * width;
    double hi = (i + 1 == n_panels) ? tmax : lo + width;
    double seg = integrate(
        [&](double s) { return std::exp(-psi * (hi - s)) * prev(s); }, lo, hi,
        1e-12, 1e-15);
    at_panel[i + 1] = std::exp(-psi * (hi - lo)) * at_panel[i] + m * seg;
  }
  auto level = [&prev, &at_panel, psi, m, width, n_panels](double x) {
    int idx = std::min(static_cast<int>(x / width), n_panels - 1);
    double lo = idx * width;
    double val = std::exp(-psi * (x - lo)) * at_panel[idx];
    if (x > lo)
      val += m * integrate(
                     [&](double s) { return std::exp(-psi * (x - s)) * prev(s); },
                     lo, x, 1e-12, 1e-15);
    return val;
  };
  return PiecewiseChebyshev::fit(level, 0, tmax, n_panels, 16);
}

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("time grid must be nonempty");
  if (!(grid.front() >= 0))
    throw std::invalid_argument("time grid must start at or after 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("time grid must be strictly increasing");
}

}  // namespace detail

/// Solves the cascade theta_k' + psi_k theta_k = m_k theta_{k-1}, theta_0 = 1,
/// level by level through the integrating-factor representation; each level
/// is carried as a piecewise-Chebyshev interpolant so deeper levels integrate
/// against it directly. Matches the closed forms at k = 1, 2 to quadrature
/// accuracy.
inline MomentCurve theta_k_recursive(const ModelParams& p, int k,
                                     const std::vector<double>& grid) {
  MomentParams mp(p, k);
  detail::check_grid(grid);
  MomentCurve curve;
  curve.times = grid;
  curve.order = k;
  curve.source = MomentCurve::Source::theory;
  double tmax = grid.back();
  if (tmax == 0) {
    curve.values.assign(grid.size(), 1.0);
    return curve;
  }

  std::vector<PiecewiseChebyshev> levels;
  levels.reserve(static_cast<std::size_t>(k));
  std::function<double(double)> prev = [](double) { return 1.0; };
  for (int j = 1; j <= k; ++j) {
    levels.push_back(
        detail::cascade_level(prev, mp.psi(j), mp.m_self(j), tmax));
    const PiecewiseChebyshev* fitted = &levels.back();
    prev = [fitted](double t) { return (*fitted)(t); };
  }
  curve.values.reserve(grid.size());
  for (double t : grid) curve.values.push_back(levels.back()(t));
  return curve;
}

/// E[lambda_t^{-1} lambda_s^{-1}] for s <= t:
///   e^{-psi1 (t-s)} theta2(s) + (m1/psi1)(1 - e^{-psi1 (t-s)}) theta1(s).
inline double product_moment(const ModelParams& p, double s, double t) {
  if (!(s >= 0) || !(t >= s))
    throw std::invalid_argument("product_moment requires 0 <= s <= t");
  MomentParams mp(p, 2);
  double decay = std::exp(-mp.psi(1) * (t - s));
  return decay * theta2(p, s) +
         mp.m_self(1) / mp.psi(1) * (1 - decay) * theta1(p, s);
}

/// Cov(lambda_s^{-1}, lambda_t^{-1}) for s <= t.
inline double covariance(const ModelParams& p, double s, double t) {
  return product_moment(p, s, t) - theta1(p, t) * theta1(p, s);
}

}  // namespace esrp
