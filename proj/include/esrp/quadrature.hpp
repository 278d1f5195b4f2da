#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace esrp {

namespace detail {

// 15-point Kronrod extension of 7-point Gauss; nonnegative abscissae.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
/// Splits the segment with the largest error estimate until the summed error
/// falls below max(abs_tol, rel_tol * |integral|).
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 0.0) {
  if (!(b >= a)) throw std::invalid_argument("integrate requires b >= a");
  if (a == b) return 0;

  struct Seg {
    double lo, hi, val, err;
  };
  auto rule = [&f](double lo, double hi) -> Seg {
    double c = 0.5 * (lo + hi);
    double h = 0.5 * (hi - lo);
    double fc = f(c);
    double resk = detail::kWgk[7] * fc;
    double resg = detail::kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
      double dx = h * detail::kXgk[j];
      double pair = f(c - dx) + f(c + dx);
      resk += detail::kWgk[j] * pair;
      if (j % 2 == 1) resg += detail::kWg[(j - 1) / 2] * pair;
    }
    return {lo, hi, resk * h, std::abs(resk - resg) * h};
  };

  std::vector<Seg> segs{rule(a, b)};
  for (int round = 0; round < 4000; ++round) {
    double total = 0, err = 0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].val;
      err += segs[i].err;
      if (segs[i].err > segs[worst].err) worst = i;
    }
    if (err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
    Seg s = segs[worst];
    double mid = 0.5 * (s.lo + s.hi);
    if (mid <= s.lo || mid >= s.hi) break;
    segs[worst] = rule(s.lo, mid);
    segs.push_back(rule(mid, s.hi));
  }

  double total = 0;
  for (const Seg& s : segs) total += s.val;
  return total;
}

/// Piecewise Chebyshev interpolant on equal panels; fitted at
/// Chebyshev-Lobatto nodes, evaluated by Clenshaw recurrence.
class PiecewiseChebyshev {
 public:
  template <class F>
  static PiecewiseChebyshev fit(F&& f, double a, double b, int n_panels,
                                int degree) {
    if (!(b > a)) throw std::invalid_argument("fit requires b > a");
    if (n_panels < 1 || degree < 2)
      throw std::invalid_argument("fit needs n_panels >= 1, degree >= 2");
    PiecewiseChebyshev pc;
    pc.a_ = a;
    pc.b_ = b;
    pc.width_ = (b - a) / n_panels;
    const int n = degree;
    const double pi = 3.14159265358979323846;
    std::vector<double> vals(n + 1);
    for (int pnl = 0; pnl < n_panels; ++pnl) {
      double lo = a + pnl * pc.width_;
      double hi = (pnl + 1 == n_panels) ? b : lo + pc.width_;
      for (int i = 0; i <= n; ++i) {
        double u = -std::cos(i * pi / n);  // ascending Lobatto nodes
        vals[i] = f(lo + (hi - lo) * 0.5 * (u + 1));
      }
      Panel panel;
      panel.coef.resize(n + 1);
      for (int j = 0; j <= n; ++j) {
        double s = 0;
        for (int i = 0; i <= n; ++i) {
          double w = (i == 0 || i == n) ? 0.5 : 1.0;
          s += w * vals[i] * std::cos(j * (pi - i * pi / n));
        }
        panel.coef[j] = 2.0 / n * s;
      }
      panel.coef[0] *= 0.5;
      panel.coef[n] *= 0.5;
      pc.panels_.push_back(std::move(panel));
    }
    return pc;
  }

  double operator()(double x) const {
    double fi = (x - a_) / width_;
    auto idx = static_cast<std::ptrdiff_t>(fi);
    idx = std::clamp<std::ptrdiff_t>(idx, 0,
                                     static_cast<std::ptrdiff_t>(panels_.size()) - 1);
    const Panel& p = panels_[static_cast<std::size_t>(idx)];
    double lo = a_ + idx * width_;
    double hi = (static_cast<std::size_t>(idx) + 1 == panels_.size()) ? b_
                                                                      : lo + width_;
    double u = std::clamp((2 * x - lo - hi) / (hi - lo), -1.0, 1.0);
    double b1 = 0, b2 = 0;
    for (std::size_t j = p.coef.size(); j-- > 1;) {
      double t = 2 * u * b1 - b2 + p.coef[j];
      b2 = b1;
      b1 = t;
    }
    return u * b1 - b2 + p.coef[0];
  }

  double lo() const { return a_; }
  double hi() const { return b_; }

 private:
  struct Panel {
    std::vector<double> coef;
  };
  std::vector<Panel> panels_;
  double a_ = 0, b_ = 0, width_ = 0;
};

}  // namespace esrp
