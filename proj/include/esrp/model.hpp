#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "jump_dist.hpp"

namespace esrp {

/// Parameters of the extrinsic stress-release process
///   lambda_t = lambda0 * exp(beta*t - S_t - S'_t),
/// where S_t sums the marks X_i of past self-arrivals and S'_t the marks Y_j
/// of an external compound Poisson stream with rate rho.
struct ModelParams {
  double lambda0;      ///< initial intensity
  double beta;         ///< stress accumulation rate
  double rho;          ///< external arrival rate; 0 disables the stream
  JumpDist jump_self;  ///< distribution of the X_i
  JumpDist jump_ext;   ///< distribution of the Y_j
};

/// Rejects parameter sets violating positivity; the message names the
/// offending field.
inline void validate(const ModelParams& p) {
  if (!(p.lambda0 > 0)) throw std::invalid_argument("lambda0 must be positive");
  if (!(p.beta > 0)) throw std::invalid_argument("beta must be positive");
  if (!(p.rho >= 0)) throw std::invalid_argument("rho must be nonnegative");
}

enum class EventKind { self, external };

struct Event {
  double time;
  EventKind kind;
  double mark;
  double intensity_before;  ///< left limit at `time`
  double intensity_after;   ///< intensity_before * exp(-mark)
};

/// Ordered record of one realized path on (0, end_time]. Times are strictly
/// increasing; between events the intensity grows by the factor
/// exp(beta * dt).
struct EventLog {
  std::vector<Event> events;
  double end_time = 0;
};

/// Mutable cursor carrying the post-jump log-intensity at clock time t.
/// Intensities are kept in the log domain throughout; exp(beta*t) over a long
/// quiet stretch overflows in linear scale.
struct IntensityState {
  double log_lambda;
  double t;
};

/// Left-limit intensity at time t: marks at times strictly before t count,
/// a mark exactly at t does not (the path is left continuous).
inline double intensity_at(const EventLog& log, const ModelParams& p,
                           double t) {
  if (!(t >= 0) || !(t <= log.end_time))
    throw std::out_of_range("query time outside [0, end_time]");
  double stress = 0;
  for (const Event& e : log.events) {
    if (e.time >= t) break;
    stress += e.mark;
  }
  return std::exp(std::log(p.lambda0) + p.beta * t - stress);
}

/// Integral of the intensity over (0, end_time], summed segment by segment
/// in closed form: each inter-event stretch contributes
/// lambda_post * (exp(beta*dt) - 1) / beta.
inline double integrated_intensity(const EventLog& log, const ModelParams& p) {
  double log_post = std::log(p.lambda0);
  double t = 0;
  double total = 0;
  for (const Event& e : log.events) {
    double dt = e.time - t;
    total += std::exp(log_post) * std::expm1(p.beta * dt) / p.beta;
    log_post += p.beta * dt - e.mark;
    t = e.time;
  }
  total += std::exp(log_post) * std::expm1(p.beta * (log.end_time - t)) / p.beta;
  return total;
}

}  // namespace esrp
