// Drives the installed binary end to end. The test runner sets ESRP_BIN to
// the built executable path.
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  const char* bin = std::getenv("ESRP_BIN");
  REQUIRE(bin != nullptr);
  std::string out_path = "/tmp/esrp_cli_out.txt";
  std::string err_path = "/tmp/esrp_cli_err.txt";
  std::string cmd =
      std::string(bin) + " " + args + " >" + out_path + " 2>" + err_path;
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -2;
  return {code, slurp(out_path), slurp(err_path)};
}

}  // namespace

TEST_CASE("top-level usage", "[cli]") {
  REQUIRE(run("").exit_code == 2);
  REQUIRE(run("frobnicate").exit_code == 2);
  RunResult version = run("--version");
  REQUIRE(version.exit_code == 0);
  REQUIRE(version.out.find("1.0.0") != std::string::npos);
  RunResult help = run("--help");
  REQUIRE(help.exit_code == 0);
  REQUIRE(help.out.find("simulate") != std::string::npos);
  REQUIRE(help.out.find("bench") != std::string::npos);
}

TEST_CASE("simulate emits the CSV schema", "[cli]") {
  RunResult r = run("simulate --end-time 5 --seed 3");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("time,kind,mark,intensity_before,intensity_after\n",
                      0) == 0);
  REQUIRE(r.out.find(",self,") != std::string::npos);

  RunResult thin = run("simulate --end-time 5 --seed 3 --method thinning");
  REQUIRE(thin.exit_code == 0);

  RunResult file = run("simulate --end-time 2 --seed 1 --out /tmp/esrp_sim.csv");
  REQUIRE(file.exit_code == 0);
  REQUIRE(slurp("/tmp/esrp_sim.csv").rfind("time,kind,", 0) == 0);

  RunResult js = run("simulate --end-time 2 --seed 1 --format json");
  REQUIRE(js.exit_code == 0);
  REQUIRE(js.out.find("\"events\"") != std::string::npos);
  REQUIRE(js.out.find("\"version\"") != std::string::npos);

  REQUIRE(run("simulate --format yaml").exit_code == 2);
  REQUIRE(run("simulate --method euler").exit_code == 2);
  REQUIRE(run("simulate --self-jump gamma:2").exit_code == 2);
  REQUIRE(run("simulate --beta -1").exit_code == 2);
  REQUIRE(run("simulate --no-such-flag 1").exit_code == 2);
}

TEST_CASE("moments prints theory curves", "[cli]") {
  RunResult r = run("moments --times 0,1,9,50");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("time,theta_1,theta_2\n", 0) == 0);
  REQUIRE(r.out.find("\n0,1,1\n") != std::string::npos);
  REQUIRE(r.out.find("3.212421955899951") != std::string::npos);

  RunResult high = run("moments --times 0,1 --orders 4 --self-jump const:0.1");
  REQUIRE(high.exit_code == 0);
  REQUIRE(high.out.rfind("time,theta_1,theta_2,theta_3,theta_4\n", 0) == 0);

  // unstable configuration names the offending orders on stderr
  RunResult bad = run("moments --beta 0.05 --times 0,1");
  REQUIRE(bad.exit_code == 2);
  REQUIRE(bad.err.find("stability") != std::string::npos);

  // divergent self moment at k = 3 for Exp(3) marks
  RunResult div = run("moments --times 0,1 --orders 3");
  REQUIRE(div.exit_code == 2);
  REQUIRE(div.err.find("error:") != std::string::npos);
}

TEST_CASE("validate reports pass and failure", "[cli]") {
  RunResult ok = run(
      "validate --n-paths 300 --grid 1,5 --delta 1 --seed 10000 --workers 2");
  REQUIRE(ok.exit_code == 0);
  REQUIRE(ok.out.find("\"pass\": true") != std::string::npos);
  REQUIRE(ok.out.find("\"points\"") != std::string::npos);

  // the hidden theory override recomputes the reference curves only, so the
  // estimates stop matching and the run must fail
  RunResult bad = run(
      "validate --n-paths 300 --grid 1,5 --delta 1 --seed 10000 "
      "--theory-beta 1.0");
  REQUIRE(bad.exit_code == 1);
  REQUIRE(bad.out.find("\"pass\": false") != std::string::npos);

  REQUIRE(run("validate --n-paths 0").exit_code == 2);
  REQUIRE(run("validate --grid 0,5 --n-paths 10").exit_code == 2);
}

TEST_CASE("bench validates input and prints the table", "[cli]") {
  RunResult r = run(
      "bench --end-time 3 --n-list 10 --deltas 0.5,1 --trials 2");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("best delta") != std::string::npos);
  REQUIRE(r.out.find("composition_s") != std::string::npos);

  REQUIRE(run("bench --n-list 0").exit_code == 2);
  REQUIRE(run("bench --trials 0 --n-list 10").exit_code == 2);
}

TEST_CASE("config file supplies defaults, flags win", "[cli]") {
  {
    std::ofstream cfg("/tmp/esrp_cfg.json");
    cfg << "{\"beta\": 0.5, \"times\": \"0,1\"}\n";
  }
  RunResult base = run("moments --times 0,1");
  RunResult cfgd = run("moments --config /tmp/esrp_cfg.json");
  REQUIRE(cfgd.exit_code == 0);
  REQUIRE(cfgd.out != base.out);  // beta came from the config

  RunResult overridden = run("moments --config /tmp/esrp_cfg.json --beta 0.25");
  REQUIRE(overridden.exit_code == 0);
  REQUIRE(overridden.out == base.out);

  {
    std::ofstream cfg("/tmp/esrp_cfg_bad.json");
    cfg << "{\"no_such_key\": 1}\n";
  }
  RunResult unknown = run("moments --config /tmp/esrp_cfg_bad.json");
  REQUIRE(unknown.exit_code == 2);
  REQUIRE(unknown.err.find("no_such_key") != std::string::npos);

  REQUIRE(run("moments --config /tmp/does_not_exist.json").exit_code == 2);
}

TEST_CASE("simulate output round trips through the CSV reader", "[cli]") {
  RunResult a = run("simulate --end-time 6 --seed 11 --out /tmp/esrp_rt.csv");
  REQUIRE(a.exit_code == 0);
  RunResult b = run("simulate --end-time 6 --seed 11");
  REQUIRE(slurp("/tmp/esrp_rt.csv") == b.out);
}
