// Samples one stress-release path with each sampler and prints the logs.

#include <cstdio>

#include <esrp/exact_sim.hpp>
#include <esrp/thinning.hpp>

int main() {
  esrp::ModelParams params{1.0, 1.5, 2.0, esrp::JumpDist::exponential(1.0),
                           esrp::JumpDist::exponential(2.0)};
  const double horizon = 10.0;

  auto print_log = [](const char* name, const esrp::EventLog& log) {
    int self = 0, ext = 0;
    for (const auto& ev : log.events)
      (ev.kind == esrp::EventKind::self ? self : ext) += 1;
    std::printf("%s: %d self + %d external events on [0, %g]\n", name, self,
                ext, log.end_time);
    std::printf("  %10s %9s %8s %12s %12s\n", "time", "kind", "mark",
                "lambda_pre", "lambda_post");
    for (const auto& ev : log.events)
      std::printf("  %10.5f %9s %8.4f %12.5f %12.5f\n", ev.time,
                  ev.kind == esrp::EventKind::self ? "self" : "external",
                  ev.mark, ev.intensity_before, ev.intensity_after);
  };

  print_log("composition", esrp::simulate_path(params, horizon, 42, 0));
  std::printf("\n");
  print_log("thinning   ",
            esrp::simulate_path_thinning(params, horizon, 1.0, 42, 0));
  return 0;
}
