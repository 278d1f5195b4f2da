// Prints theta_1 and theta_2 against Monte Carlo estimates from both
// samplers on a coarse grid.

#include <cstdio>

#include <esrp/montecarlo.hpp>

int main() {
  esrp::ModelParams params{1.0, 0.25, 1.25, esrp::JumpDist::exponential(3.0),
                           esrp::JumpDist::exponential(10.0)};
  std::vector<double> grid{1, 5, 10, 25, 50};

  auto report = esrp::compare_estimators(params, grid, 2000, 1.86, 7);
  auto print_rows = [](const char* name,
                       const std::vector<esrp::CompareReport::Point>& pts) {
    std::printf("%s\n  %6s %10s %22s %22s\n", name, "t", "theory",
                "composition (95%)", "thinning (95%)");
    for (const auto& pt : pts)
      std::printf("  %6g %10.5f %13.5f +- %6.4f %13.5f +- %6.4f\n", pt.t,
                  pt.theory, pt.mean_composition, pt.half_width_composition,
                  pt.mean_thinning, pt.half_width_thinning);
  };
  print_rows("theta_1(t) = E[1/lambda_t]", report.k1);
  print_rows("theta_2(t) = E[1/lambda_t^2]", report.k2);
  std::printf("wall: composition %.3fs, thinning %.3fs (delta = %g)\n",
              report.wall_composition, report.wall_thinning, report.delta);
  return 0;
}
