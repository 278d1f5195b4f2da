#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include <esrp/model.hpp>

using namespace esrp;

namespace {

ModelParams base_params() {
  return {1.0, 0.25, 1.25, JumpDist::exponential(3.0),
          JumpDist::exponential(10.0)};
}

}  // namespace

TEST_CASE("validate names the offending field", "[model]") {
  ModelParams p = base_params();
  REQUIRE_NOTHROW(validate(p));

  p.lambda0 = 0;
  REQUIRE_THROWS_WITH(validate(p), "lambda0 must be positive");
  p = base_params();
  p.beta = -1;
  REQUIRE_THROWS_WITH(validate(p), "beta must be positive");
  p = base_params();
  p.rho = -0.1;
  REQUIRE_THROWS_WITH(validate(p), "rho must be nonnegative");
  p = base_params();
  p.rho = 0;  // disabling the external stream is legal
  REQUIRE_NOTHROW(validate(p));
}

TEST_CASE("intensity_at returns the left limit", "[model]") {
  ModelParams p{2.0, 0.5, 0.0, JumpDist::exponential(1.0),
                JumpDist::exponential(1.0)};
  EventLog log;
  double m1 = std::log(2.0);
  log.events.push_back({1.0, EventKind::self, m1, 2.0 * std::exp(0.5),
                        std::exp(0.5)});
  log.end_time = 3.0;

  REQUIRE(intensity_at(log, p, 0.0) == 2.0);
  // at the event time the mark has not yet applied
  REQUIRE(intensity_at(log, p, 1.0) == Catch::Approx(2.0 * std::exp(0.5)));
  // after the event the level is halved
  REQUIRE(intensity_at(log, p, 1.5) ==
          Catch::Approx(2.0 * std::exp(0.75) / 2.0));
  REQUIRE(intensity_at(log, p, 3.0) ==
          Catch::Approx(2.0 * std::exp(1.5) / 2.0));

  REQUIRE_THROWS_AS(intensity_at(log, p, -0.1), std::out_of_range);
  REQUIRE_THROWS_AS(intensity_at(log, p, 3.1), std::out_of_range);
}

TEST_CASE("integrated intensity sums segments in closed form", "[model]") {
  ModelParams p{1.0, 1.0, 0.0, JumpDist::exponential(1.0),
                JumpDist::exponential(1.0)};

  EventLog empty;
  empty.end_time = 2.0;
  REQUIRE(integrated_intensity(empty, p) ==
          Catch::Approx(std::exp(2.0) - 1).epsilon(1e-14));

  EventLog one;
  one.end_time = 2.0;
  one.events.push_back(
      {1.0, EventKind::self, std::log(2.0), std::exp(1.0), std::exp(1.0) / 2});
  double expected = (std::exp(1.0) - 1) + (std::exp(2.0) - std::exp(1.0)) / 2;
  REQUIRE(integrated_intensity(one, p) == Catch::Approx(expected).epsilon(1e-14));
}

TEST_CASE("event log defaults are empty", "[model]") {
  EventLog log;
  REQUIRE(log.events.empty());
  REQUIRE(log.end_time == 0);
  REQUIRE(intensity_at(log, base_params(), 0.0) == 1.0);
}
