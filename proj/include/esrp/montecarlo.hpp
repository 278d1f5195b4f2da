#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "exact_sim.hpp"
#include "model.hpp"
#include "moments.hpp"
#include "thinning.hpp"

namespace esrp {

enum class Method { composition, thinning };

/// Estimation setup. `workers = 0` means one thread per hardware core.
/// `delta` is only consulted by the thinning method.
struct McConfig {
  int n_paths = 10000;
  std::vector<double> time_grid;
  Method method = Method::composition;
  double delta = 1.86;
  std::uint64_t base_seed = 0;
  int workers = 0;
};

/// Grid estimate of E[lambda_t^{-k}] with pointwise 95% half-widths.
struct McEstimate {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> half_width_95;
  int k = 1;
  int n_paths = 0;
};

namespace detail {

/// Compensated accumulator; folding path rows in index order makes every
/// estimate bit-identical regardless of worker count.
struct KahanSum {
  double sum = 0, carry = 0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

inline double reciprocal_power(double lambda, int k) {
  if (k == 1) return 1.0 / lambda;
  if (k == 2) return 1.0 / (lambda * lambda);
  return std::pow(lambda, -k);
}

}  // namespace detail

/// Simulates cfg.n_paths independent paths (path i uses RNG stream i offset
/// from cfg.base_seed), evaluates lambda_t^{-k} on the grid, and averages.
/// Work is pulled from a shared counter by a thread pool, but rows are folded
/// in path order afterwards, so results do not depend on cfg.workers.
inline McEstimate estimate_reciprocal_moment(const McConfig& cfg,
                                             const ModelParams& params,
                                             int k) {
  validate(params);
  if (k < 1) throw std::invalid_argument("moment order must be >= 1");
  if (cfg.n_paths <= 0) throw std::invalid_argument("n_paths must be positive");
  detail::check_grid(cfg.time_grid);
  if (cfg.method == Method::thinning && !(cfg.delta > 0))
    throw std::invalid_argument("thinning requires delta > 0");

  const std::size_t n_times = cfg.time_grid.size();
  const double end_time = cfg.time_grid.back();
  std::vector<std::vector<double>> rows(
      static_cast<std::size_t>(cfg.n_paths));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= cfg.n_paths) return;
      std::uint64_t stream = cfg.base_seed + static_cast<std::uint64_t>(i);
      EventLog log;
      if (end_time == 0) {
        log.end_time = 0;
      } else if (cfg.method == Method::composition) {
        log = simulate_path(params, end_time, 1, stream);
      } else {
        log = simulate_path_thinning(params, end_time, cfg.delta, 1, stream);
      }
      auto& row = rows[static_cast<std::size_t>(i)];
      row.reserve(n_times);
      for (double t : cfg.time_grid)
        row.push_back(detail::reciprocal_power(intensity_at(log, params, t), k));
    }
  };

  int n_workers = cfg.workers > 0
                      ? cfg.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min(n_workers, cfg.n_paths);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  McEstimate est;
  est.grid = cfg.time_grid;
  est.k = k;
  est.n_paths = cfg.n_paths;
  est.mean.resize(n_times);
  est.half_width_95.resize(n_times);
  const double n = cfg.n_paths;
  for (std::size_t j = 0; j < n_times; ++j) {
    detail::KahanSum acc;
    for (const auto& row : rows) acc.add(row[j]);
    double mean = acc.sum / n;
    est.mean[j] = mean;
    if (cfg.n_paths == 1) {
      est.half_width_95[j] = 0;
      continue;
    }
    detail::KahanSum sq;
    for (const auto& row : rows) {
      double d = row[j] - mean;
      sq.add(d * d);
    }
    double sd = std::sqrt(sq.sum / (n - 1));
    est.half_width_95[j] = 1.96 * sd / std::sqrt(n);
  }
  return est;
}

/// View of a Monte Carlo estimate as a moment curve.
inline MomentCurve to_moment_curve(const McEstimate& est) {
  MomentCurve curve;
  curve.times = est.grid;
  curve.values = est.mean;
  curve.order = est.k;
  curve.source = MomentCurve::Source::monte_carlo;
  curve.ci_half_width = est.half_width_95;
  return curve;
}

/// Side-by-side run of both samplers against theory for k = 1, 2.
struct CompareReport {
  struct Point {
    double t = 0;
    double theory = 0;
    double mean_composition = 0, half_width_composition = 0;
    double mean_thinning = 0, half_width_thinning = 0;
    bool ci_overlap = false;  ///< |mean gap| within summed half-widths
  };
  std::vector<Point> k1, k2;
  double wall_composition = 0, wall_thinning = 0;  ///< seconds, all k
  double delta = 0;
  int n_paths = 0;
};

/// Runs both samplers on the same grid with the same seed layout and checks
/// pointwise agreement of their confidence intervals.
inline CompareReport compare_estimators(const ModelParams& params,
                                        const std::vector<double>& grid,
                                        int n_paths, double delta,
                                        std::uint64_t base_seed) {
  if (n_paths <= 0) throw std::invalid_argument("n_paths must be positive");
  detail::check_grid(grid);
  MomentParams mp(params, 2);

  McConfig cfg;
  cfg.n_paths = n_paths;
  cfg.time_grid = grid;
  cfg.delta = delta;
  cfg.base_seed = base_seed;

  using clock = std::chrono::steady_clock;
  CompareReport rep;
  rep.delta = delta;
  rep.n_paths = n_paths;

  cfg.method = Method::composition;
  auto t0 = clock::now();
  McEstimate comp1 = estimate_reciprocal_moment(cfg, params, 1);
  McEstimate comp2 = estimate_reciprocal_moment(cfg, params, 2);
  rep.wall_composition = std::chrono::duration<double>(clock::now() - t0).count();

  cfg.method = Method::thinning;
  t0 = clock::now();
  McEstimate thin1 = estimate_reciprocal_moment(cfg, params, 1);
  McEstimate thin2 = estimate_reciprocal_moment(cfg, params, 2);
  rep.wall_thinning = std::chrono::duration<double>(clock::now() - t0).count();

  auto collect = [&](const McEstimate& c, const McEstimate& th, int k,
                     std::vector<CompareReport::Point>& out) {
    out.reserve(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      CompareReport::Point pt;
      pt.t = grid[j];
      pt.theory = k == 1 ? theta1(params, pt.t) : theta2(params, pt.t);
      pt.mean_composition = c.mean[j];
      pt.half_width_composition = c.half_width_95[j];
      pt.mean_thinning = th.mean[j];
      pt.half_width_thinning = th.half_width_95[j];
      pt.ci_overlap = std::abs(c.mean[j] - th.mean[j]) <=
                      c.half_width_95[j] + th.half_width_95[j];
      out.push_back(pt);
    }
  };
  collect(comp1, thin1, 1, rep.k1);
  collect(comp2, thin2, 2, rep.k2);
  return rep;
}

}  // namespace esrp
