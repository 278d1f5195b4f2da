#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "lambert.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace esrp {

/// The two competing interarrival candidates drawn after an event: tau1 for
/// the next self-arrival, tau2 for the next external arrival.
struct CompositionDraw {
  double tau1;       ///< candidate self interarrival
  double tau2;       ///< candidate external interarrival; +inf when rho = 0
  EventKind winner;  ///< self iff tau1 <= tau2
};

/// P(joint interarrival <= t) given the post-jump intensity lambda_post:
///   1 - exp(-(lambda_post/beta) * (e^{beta t} - 1)) * exp(-rho t).
inline double interarrival_cdf(double lambda_post, const ModelParams& p,
                               double t) {
  if (!(lambda_post > 0))
    throw std::invalid_argument("lambda_post must be positive");
  if (!(t >= 0)) throw std::invalid_argument("t must be nonnegative");
  return -std::expm1(-(lambda_post / p.beta) * std::expm1(p.beta * t) -
                     p.rho * t);
}

/// Inverse-transform draw of both interarrival candidates from uniforms
/// u1, u2; min(tau1, tau2) follows interarrival_cdf. Ties go to self.
inline CompositionDraw sample_composition(const IntensityState& state,
                                          const ModelParams& p, double u1,
                                          double u2) {
  // beta*tau1 = log1p(beta*E1 / lambda), rewritten as the softplus of
  // log(beta*E1) - log(lambda) so extreme log-intensities stay finite
  double e1 = -std::log(u1);
  double z = std::log(p.beta * e1) - state.log_lambda;
  double bt = z > 36 ? z + std::exp(-z) : std::log1p(std::exp(z));
  double tau1 = bt / p.beta;
  double tau2 = p.rho > 0 ? -std::log(u2) / p.rho
                          : std::numeric_limits<double>::infinity();
  return {tau1, tau2, tau1 <= tau2 ? EventKind::self : EventKind::external};
}

/// Solves interarrival_cdf(lambda_post, p, t) = u in closed form through the
/// principal Lambert W branch, then polishes with Newton steps so that
/// |F(t) - u| <= 1e-10. Arguments beyond the exp overflow threshold are
/// routed through the log-domain W evaluation.
inline double inverse_interarrival_cdf(double lambda_post,
                                       const ModelParams& p, double u) {
  if (!(lambda_post > 0))
    throw std::invalid_argument("lambda_post must be positive");
  if (!(u > 0 && u < 1)) throw std::invalid_argument("u must lie in (0, 1)");
  double a = lambda_post / p.beta;
  double q = -std::log1p(-u);
  if (p.rho == 0) return std::log1p(q / a) / p.beta;

  double c = a + q;
  double arg = p.beta * c / p.rho;
  double w;
  if (arg > 700) {
    w = lambert_w0_exp(std::log(a * p.beta / p.rho) + arg);
  } else {
    w = lambert_w0(a * p.beta / p.rho * std::exp(arg));
  }
  double t = c / p.rho - w / p.beta;
  if (t < 0) t = 0;
  for (int i = 0; i < 3; ++i) {
    double cdf = interarrival_cdf(lambda_post, p, t);
    double resid = cdf - u;
    if (std::abs(resid) <= 1e-12) break;
    double slope =
        (lambda_post * std::exp(p.beta * t) + p.rho) * (1 - cdf);
    if (!(slope > 0)) break;
    t -= resid / slope;
    if (t < 0) t = 0;
  }
  return t;
}

/// Exact path sampling by composition: after each event the two candidate
/// interarrivals race, the winning side's mark is drawn, and the log-intensity
/// cursor grows by beta*tau then drops by the mark. Deterministic in
/// (seed, stream).
inline EventLog simulate_path(const ModelParams& p, double end_time,
                              std::uint64_t seed, std::uint64_t stream = 0) {
  validate(p);
  if (!(end_time >= 0))
    throw std::invalid_argument("end_time must be nonnegative");
  Philox rng(seed, stream, 0);
  IntensityState state{std::log(p.lambda0), 0.0};
  EventLog log;
  log.end_time = end_time;
  while (true) {
    double u1 = rng.uniform();
    double u2 = p.rho > 0 ? rng.uniform() : 0.5;
    CompositionDraw d = sample_composition(state, p, u1, u2);
    bool self = d.winner == EventKind::self;
    double tau = self ? d.tau1 : d.tau2;
    double t_next = state.t + tau;
    if (!(t_next <= end_time)) break;
    double mark = (self ? p.jump_self : p.jump_ext).sample(rng);
    double log_pre = state.log_lambda + p.beta * tau;
    double before = std::exp(log_pre);
    log.events.push_back(
        {t_next, d.winner, mark, before, before * std::exp(-mark)});
    state = {log_pre - mark, t_next};
  }
  return log;
}

}  // namespace esrp
