// esrp: simulate extrinsic stress-release paths, evaluate reciprocal-moment
// theory, cross-validate the two samplers, and benchmark them.
//
// Exit codes: 0 success, 1 validation band failure, 2 usage or config error.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include <esrp/io.hpp>
#include <esrp/model.hpp>
#include <esrp/moments.hpp>
#include <esrp/montecarlo.hpp>
#include <esrp/version.hpp>

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_strict_double(std::string_view s, const std::string& what) {
  double x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw UsageError("cannot parse number '" + std::string(s) + "' in " + what);
  return x;
}

esrp::JumpDist parse_jump(const std::string& spec, const std::string& flag) {
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    std::string head = spec.substr(0, colon);
    double value = parse_strict_double(spec.substr(colon + 1), flag);
    if (head == "exp") return esrp::JumpDist::exponential(value);
    if (head == "const") return esrp::JumpDist::deterministic(value);
  }
  throw UsageError(flag + " must be exp:<rate> or const:<x0>, got '" + spec +
                   "'");
}

std::vector<double> parse_double_list(const std::string& s,
                                      const std::string& flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::size_t end = comma == std::string::npos ? s.size() : comma;
    out.push_back(parse_strict_double(
        std::string_view(s).substr(pos, end - pos), flag));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw UsageError(flag + " must be a nonempty list");
  return out;
}

// "start:stop:step", stop inclusive up to rounding slack
std::vector<double> parse_grid_range(const std::string& s,
                                     const std::string& flag) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t colon = s.find(':', pos);
    parts.push_back(s.substr(pos, colon == std::string::npos ? std::string::npos
                                                             : colon - pos));
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (parts.size() != 3)
    throw UsageError(flag + " must be start:stop:step, got '" + s + "'");
  double start = parse_strict_double(parts[0], flag);
  double stop = parse_strict_double(parts[1], flag);
  double step = parse_strict_double(parts[2], flag);
  if (!(step > 0) || stop < start)
    throw UsageError(flag + " needs step > 0 and stop >= start");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    double t = start + i * step;
    if (t > stop + 1e-9 * step) break;
    out.push_back(std::min(t, stop));
  }
  return out;
}

std::string format_double(double x) {
  std::string s;
  esrp::detail::append_double(s, x);
  return s;
}

// Model flags shared by every subcommand (defaults: the long-run validation
// configuration lambda0=1, beta=0.25, rho=1.25, self exp:3, external exp:10).
struct ModelFlags {
  double lambda0 = 1.0;
  double beta = 0.25;
  double rho = 1.25;
  std::string self_jump = "exp:3";
  std::string ext_jump = "exp:10";

  esrp::ModelParams build() const {
    esrp::ModelParams p{lambda0, beta, rho,
                        parse_jump(self_jump, "--self-jump"),
                        parse_jump(ext_jump, "--ext-jump")};
    esrp::validate(p);
    return p;
  }

  json to_json() const {
    return json{{"lambda0", lambda0},
                {"beta", beta},
                {"rho", rho},
                {"self_jump", self_jump},
                {"ext_jump", ext_jump}};
  }
};

// --config <file> supplies a flat JSON object whose keys are long flag names
// without the leading dashes; explicit flags override it. The registry maps
// each key onto every bound variable that shares the flag name.
struct ConfigRegistry {
  std::map<std::string, std::vector<std::function<void(const json&)>>> setters;

  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& var,
                   const std::string& desc) {
    setters[name.substr(2)].push_back([&var](const json& j) { var = j.get<T>(); });
    return app->add_option(name, var, desc);
  }

  void apply(const json& cfg) {
    if (!cfg.is_object())
      throw UsageError("config file must hold a flat JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      auto found = setters.find(it.key());
      if (found == setters.end())
        throw UsageError("unknown config key '" + it.key() + "'");
      try {
        for (auto& set : found->second) set(it.value());
      } catch (const json::exception&) {
        throw UsageError("config key '" + it.key() + "' has the wrong type");
      }
    }
  }
};

void add_model_flags(CLI::App* app, ConfigRegistry& reg, ModelFlags& m) {
  reg.add(app, "--lambda0", m.lambda0, "baseline intensity lambda_0 (> 0)");
  reg.add(app, "--beta", m.beta, "exponential loading rate (> 0)");
  reg.add(app, "--rho", m.rho, "external event rate (>= 0)");
  reg.add(app, "--self-jump", m.self_jump,
          "self mark law, exp:<rate> or const:<x0>");
  reg.add(app, "--ext-jump", m.ext_jump,
          "external mark law, exp:<rate> or const:<x0>");
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path == "-") return std::cout;
  file.open(path);
  if (!file) throw UsageError("cannot open output file '" + path + "'");
  return file;
}

esrp::Method parse_method(const std::string& s) {
  if (s == "composition") return esrp::Method::composition;
  if (s == "thinning") return esrp::Method::thinning;
  throw UsageError("--method must be composition or thinning, got '" + s + "'");
}

json events_to_json(const esrp::EventLog& log) {
  json arr = json::array();
  for (const auto& ev : log.events)
    arr.push_back(json{
        {"time", ev.time},
        {"kind", ev.kind == esrp::EventKind::self ? "self" : "external"},
        {"mark", ev.mark},
        {"intensity_before", ev.intensity_before},
        {"intensity_after", ev.intensity_after}});
  return arr;
}

// ---------------------------------------------------------------- simulate
struct SimulateArgs {
  ModelFlags model;
  double end_time = 10.0;
  std::string method = "composition";
  double delta = 1.86;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string format = "csv";
};

int cmd_simulate(const SimulateArgs& a) {
  esrp::ModelParams params = a.model.build();
  if (!(a.end_time >= 0)) throw UsageError("--end-time must be nonnegative");
  esrp::EventLog log;
  if (parse_method(a.method) == esrp::Method::composition) {
    log = esrp::simulate_path(params, a.end_time, a.seed, 0);
  } else {
    if (!(a.delta > 0)) throw UsageError("--delta must be positive");
    log = esrp::simulate_path_thinning(params, a.end_time, a.delta, a.seed, 0);
  }

  std::ofstream file;
  std::ostream& os = open_output(a.out, file);
  if (a.format == "csv") {
    esrp::write_event_log_csv(os, log);
  } else if (a.format == "json") {
    json doc{{"version", esrp::kVersion},
             {"params", a.model.to_json()},
             {"method", a.method},
             {"end_time", log.end_time},
             {"seed", a.seed},
             {"events", events_to_json(log)}};
    os << doc.dump(2) << '\n';
  } else {
    throw UsageError("--format must be csv or json, got '" + a.format + "'");
  }
  return 0;
}

// ----------------------------------------------------------------- moments
struct MomentsArgs {
  ModelFlags model;
  std::string grid = "0:50:1";
  std::string times;
  int orders = 2;
  std::string out = "-";
};

int cmd_moments(const MomentsArgs& a) {
  esrp::ModelParams params = a.model.build();
  if (a.orders < 1) throw UsageError("--orders must be >= 1");
  std::vector<double> ts = a.times.empty()
                               ? parse_grid_range(a.grid, "--grid")
                               : parse_double_list(a.times, "--times");
  esrp::detail::check_grid(ts);

  std::vector<std::vector<double>> columns;
  for (int k = 1; k <= a.orders; ++k) {
    std::vector<double> col;
    col.reserve(ts.size());
    if (k == 1) {
      for (double t : ts) col.push_back(esrp::theta1(params, t));
    } else if (k == 2) {
      for (double t : ts) col.push_back(esrp::theta2(params, t));
    } else {
      col = esrp::theta_k_recursive(params, k, ts).values;
    }
    columns.push_back(std::move(col));
  }

  std::ofstream file;
  std::ostream& os = open_output(a.out, file);
  std::string buf = "time";
  for (int k = 1; k <= a.orders; ++k) buf += ",theta_" + std::to_string(k);
  buf += '\n';
  for (std::size_t i = 0; i < ts.size(); ++i) {
    buf += format_double(ts[i]);
    for (const auto& col : columns) {
      buf += ',';
      buf += format_double(col[i]);
    }
    buf += '\n';
  }
  os << buf;
  return 0;
}

// ---------------------------------------------------------------- validate
struct ValidateArgs {
  ModelFlags model;
  std::string grid = "1,5,10,25,50";
  int n_paths = 10000;
  double delta = 0;  // 0: search over kDeltaCandidates
  int workers = 0;
  std::uint64_t seed = 0;
  std::string out = "-";
  double theory_beta = std::numeric_limits<double>::quiet_NaN();
};

constexpr double kBand995OverBand95 = 2.807033768343811 / 1.96;
const std::vector<double> kDeltaCandidates{0.25, 0.5, 1.0, 1.86, 3.0, 6.0};

int cmd_validate(const ValidateArgs& a) {
  esrp::ModelParams params = a.model.build();
  if (a.n_paths <= 0) throw UsageError("--n-paths must be positive");
  std::vector<double> grid = parse_double_list(a.grid, "--grid");
  esrp::detail::check_grid(grid);
  if (!(grid.front() > 0))
    throw UsageError("--grid times must be positive");

  int workers = a.workers;
  if (workers == 0) {
    if (const char* env = std::getenv("ESRP_WORKERS"))
      workers = static_cast<int>(parse_strict_double(env, "ESRP_WORKERS"));
  }

  double delta = a.delta;
  if (delta == 0)
    delta = esrp::grid_search_delta(params, grid.back(), kDeltaCandidates, 4);
  else if (!(delta > 0))
    throw UsageError("--delta must be positive (or 0 to grid search)");

  // Theory curves may deliberately be computed from a different beta; the
  // bands are then expected to fail, which exercises the failure exit path.
  esrp::ModelParams theory = params;
  if (!std::isnan(a.theory_beta)) theory.beta = a.theory_beta;
  esrp::validate(theory);
  esrp::MomentParams guard(theory, 2);  // surface stability problems early

  esrp::McConfig cfg;
  cfg.n_paths = a.n_paths;
  cfg.time_grid = grid;
  cfg.delta = delta;
  cfg.base_seed = a.seed;
  cfg.workers = workers;

  using clock = std::chrono::steady_clock;
  cfg.method = esrp::Method::composition;
  auto t0 = clock::now();
  esrp::McEstimate comp1 = esrp::estimate_reciprocal_moment(cfg, params, 1);
  esrp::McEstimate comp2 = esrp::estimate_reciprocal_moment(cfg, params, 2);
  double wall_comp = std::chrono::duration<double>(clock::now() - t0).count();

  cfg.method = esrp::Method::thinning;
  t0 = clock::now();
  esrp::McEstimate thin1 = esrp::estimate_reciprocal_moment(cfg, params, 1);
  esrp::McEstimate thin2 = esrp::estimate_reciprocal_moment(cfg, params, 2);
  double wall_thin = std::chrono::duration<double>(clock::now() - t0).count();

  bool all_pass = true;
  json points = json::array();
  auto add_points = [&](const esrp::McEstimate& est, const char* method) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double t = grid[j];
      double ref = est.k == 1 ? esrp::theta1(theory, t) : esrp::theta2(theory, t);
      double band = kBand995OverBand95 * est.half_width_95[j];
      bool pass = std::abs(est.mean[j] - ref) <= band;
      all_pass = all_pass && pass;
      points.push_back(json{{"t", t},
                            {"k", est.k},
                            {"method", method},
                            {"mean", est.mean[j]},
                            {"half_width_95", est.half_width_95[j]},
                            {"theory", ref},
                            {"pass", pass}});
    }
  };
  add_points(comp1, "composition");
  add_points(comp2, "composition");
  add_points(thin1, "thinning");
  add_points(thin2, "thinning");

  json doc{{"version", esrp::kVersion},
           {"params", a.model.to_json()},
           {"base_seed", a.seed},
           {"n_paths", a.n_paths},
           {"workers", workers},
           {"delta", delta},
           {"wall_composition_s", wall_comp},
           {"wall_thinning_s", wall_thin},
           {"points", points},
           {"pass", all_pass}};
  std::ofstream file;
  std::ostream& os = open_output(a.out, file);
  os << doc.dump(2) << '\n';
  return all_pass ? 0 : 1;
}

// ------------------------------------------------------------------- bench
struct BenchArgs {
  ModelFlags model;
  double end_time = 100.0;
  std::string n_list = "100,1000";
  std::string deltas = "0.25,0.5,1,1.86,3,6";
  int trials = 8;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a) {
  esrp::ModelParams params = a.model.build();
  if (!(a.end_time > 0)) throw UsageError("--end-time must be positive");
  if (a.trials <= 0) throw UsageError("--trials must be positive");
  std::vector<double> deltas = parse_double_list(a.deltas, "--deltas");
  std::vector<double> raw_ns = parse_double_list(a.n_list, "--n-list");
  std::vector<int> ns;
  for (double v : raw_ns) {
    int n = static_cast<int>(v);
    if (!(v > 0) || n != v)
      throw UsageError("--n-list entries must be positive integers");
    ns.push_back(n);
  }

  double best_delta =
      esrp::grid_search_delta(params, a.end_time, deltas, a.trials);
  std::printf("delta grid search over %s (T=%g, trials=%d): best delta = %g\n",
              a.deltas.c_str(), a.end_time, a.trials, best_delta);

  auto time_batch = [&](esrp::Method method, int n) {
    volatile std::size_t sink = 0;
    auto run_once = [&] {
      auto t0 = std::chrono::steady_clock::now();
      for (int i = 0; i < n; ++i) {
        std::uint64_t stream = a.seed + static_cast<std::uint64_t>(i);
        if (method == esrp::Method::composition)
          sink = sink + esrp::simulate_path(params, a.end_time, 1, stream)
                            .events.size();
        else
          sink = sink + esrp::simulate_path_thinning(params, a.end_time,
                                                     best_delta, 1, stream)
                            .events.size();
      }
      return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           t0)
          .count();
    };
    run_once();  // warmup
    double best = run_once();
    for (int rep = 1; rep < 3; ++rep) best = std::min(best, run_once());
    return best;
  };

  std::printf("%10s %18s %18s %12s\n", "n_paths", "composition_s",
              "thinning_s", "thin/comp");
  for (int n : ns) {
    double comp = time_batch(esrp::Method::composition, n);
    double thin = time_batch(esrp::Method::thinning, n);
    std::printf("%10d %18.6f %18.6f %12.3f\n", n, comp, thin, thin / comp);
  }
  return 0;
}

std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string_view arg{argv[i]};
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0)
      return std::string(arg.substr(std::string_view("--config=").size()));
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extrinsic stress-release process: simulation and moments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", esrp::kVersion);

  ConfigRegistry reg;
  std::string config_path;

  SimulateArgs sim;
  CLI::App* s = app.add_subcommand(
      "simulate", "sample one path and write its event log");
  add_model_flags(s, reg, sim.model);
  reg.add(s, "--end-time", sim.end_time, "simulation horizon T");
  reg.add(s, "--method", sim.method, "composition or thinning");
  reg.add(s, "--delta", sim.delta, "thinning window width");
  reg.add(s, "--seed", sim.seed, "RNG seed");
  reg.add(s, "--out", sim.out, "output path, - for stdout");
  reg.add(s, "--format", sim.format, "csv or json");
  s->add_option("--config", config_path, "flat JSON config file");

  MomentsArgs mom;
  CLI::App* m = app.add_subcommand(
      "moments", "evaluate reciprocal-moment curves theta_k(t)");
  add_model_flags(m, reg, mom.model);
  reg.add(m, "--grid", mom.grid, "time grid start:stop:step");
  reg.add(m, "--times", mom.times, "explicit time list t1,t2,...");
  reg.add(m, "--orders", mom.orders, "highest moment order K");
  reg.add(m, "--out", mom.out, "output path, - for stdout");
  m->add_option("--config", config_path, "flat JSON config file");

  ValidateArgs val;
  CLI::App* v = app.add_subcommand(
      "validate", "check both samplers against theory on a time grid");
  add_model_flags(v, reg, val.model);
  reg.add(v, "--grid", val.grid, "comma list of check times");
  reg.add(v, "--n-paths", val.n_paths, "Monte Carlo sample size");
  reg.add(v, "--delta", val.delta, "thinning window width, 0 = grid search");
  reg.add(v, "--workers", val.workers,
          "thread count, 0 = ESRP_WORKERS env or hardware");
  reg.add(v, "--seed", val.seed, "base RNG seed");
  reg.add(v, "--out", val.out, "report path, - for stdout");
  v->add_option("--theory-beta", val.theory_beta,
                "override beta in the theory curves only")
      ->group("");
  v->add_option("--config", config_path, "flat JSON config file");

  BenchArgs ben;
  CLI::App* b = app.add_subcommand(
      "bench", "time both samplers after a delta grid search");
  add_model_flags(b, reg, ben.model);
  reg.add(b, "--end-time", ben.end_time, "simulation horizon T");
  reg.add(b, "--n-list", ben.n_list, "comma list of path counts");
  reg.add(b, "--deltas", ben.deltas, "comma list of candidate deltas");
  reg.add(b, "--trials", ben.trials, "paths per delta candidate");
  reg.add(b, "--seed", ben.seed, "base RNG seed");
  b->add_option("--config", config_path, "flat JSON config file");

  try {
    std::string early_config = find_config_path(argc, argv);
    if (!early_config.empty()) {
      std::ifstream in(early_config);
      if (!in) throw UsageError("cannot open config file '" + early_config + "'");
      json cfg;
      try {
        cfg = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError("config file is not valid JSON: " +
                         std::string(e.what()));
      }
      reg.apply(cfg);
    }

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }

    if (s->parsed()) return cmd_simulate(sim);
    if (m->parsed()) return cmd_moments(mom);
    if (v->parsed()) return cmd_validate(val);
    return cmd_bench(ben);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
