#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "rng.hpp"

namespace esrp {

/// Distribution of a strictly positive jump mark, together with its
/// exponential moments m_k = E[e^{kX}] - 1 where they exist.
class JumpDist {
 public:
  enum class Kind { exponential, deterministic, custom };

  static JumpDist exponential(double rate) {
    if (!(rate > 0)) throw std::invalid_argument("jump rate must be positive");
    JumpDist d;
    d.kind_ = Kind::exponential;
    d.param_ = rate;
    return d;
  }

  static JumpDist deterministic(double x0) {
    if (!(x0 > 0))
      throw std::invalid_argument("deterministic jump must be positive");
    JumpDist d;
    d.kind_ = Kind::deterministic;
    d.param_ = x0;
    return d;
  }

  /// User-supplied sampler paired with its exponential moments. The sampler
  /// must return strictly positive values; moments(k) must equal
  /// E[e^{kX}] - 1 and throw when the integral diverges.
  static JumpDist custom(std::function<double(Philox&)> sampler,
                         std::function<double(int)> moments) {
    if (!sampler || !moments)
      throw std::invalid_argument("custom jump needs sampler and moments");
    JumpDist d;
    d.kind_ = Kind::custom;
    d.sampler_ = std::move(sampler);
    d.moments_ = std::move(moments);
    return d;
  }

  Kind kind() const { return kind_; }

  /// Rate for exponential, point mass for deterministic.
  double param() const { return param_; }

  double sample(Philox& rng) const {
    switch (kind_) {
      case Kind::exponential:
        return rng.exponential(param_);
      case Kind::deterministic:
        return param_;
      default:
        return sampler_(rng);
    }
  }

  /// m_k = E[e^{kX}] - 1. Throws std::domain_error when the defining
  /// integral diverges (exponential with rate a requires a > k).
  double exp_moment(int k) const {
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    switch (kind_) {
      case Kind::exponential:
        if (!(param_ > k))
          throw std::domain_error("exponential moment m_" + std::to_string(k) +
                                  " diverges: rate " + std::to_string(param_) +
                                  " must exceed the order");
        return k / (param_ - k);
      case Kind::deterministic:
        return std::expm1(k * param_);
      default:
        return moments_(k);
    }
  }

 private:
  JumpDist() = default;

  Kind kind_ = Kind::deterministic;
  double param_ = 1.0;
  std::function<double(Philox&)> sampler_;
  std::function<double(int)> moments_;
};

}  // namespace esrp
