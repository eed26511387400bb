#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ehcr/config.hpp"

using namespace ehcr;
namespace fs = std::filesystem;

namespace {

constexpr const char* kBaselineFile = R"(# baseline channels
p_pd_success = 0.3
p_ss_success = 0.4
s_pd_success = 0.7
s_sd_success = 0.7
lambda_ep = 0.6
lambda_es = 0.6
policy = cooperative
access_prob_a = 0.5
mode = analytic
)";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ehcr_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("baseline file gives the fig4 setup") {
  const auto spec = parse_config(kBaselineFile);
  const auto fig4 = builtin_experiment("fig4");
  CHECK(spec.params == fig4.params);
  CHECK(spec.policies == fig4.policies);
  CHECK(spec.mode == RunMode::AnalyticOnly);
  CHECK(spec.grids.lambda_p == fig4.grids.lambda_p);
  CHECK(spec.grids.a == fig4.grids.a);
  CHECK(spec.sim.seed == 42);
}

TEST_CASE("config errors") {
  SUBCASE("out of range value names the key") {
    std::string text = kBaselineFile;
    text.replace(text.find("lambda_ep = 0.6"), 15, "lambda_ep = 1.5");
    try {
      parse_config(text);
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("lambda_ep") != std::string::npos);
    }
  }
  SUBCASE("empty file lists the four channel keys") {
    try {
      parse_config("");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      for (const char* k : {"p_pd_success", "p_ss_success", "s_pd_success", "s_sd_success"}) {
        CHECK(msg.find(k) != std::string::npos);
      }
    }
  }
  SUBCASE("unknown key is rejected") {
    CHECK_THROWS_AS(parse_config(std::string(kBaselineFile) + "lambda_x = 0.1\n"), ConfigError);
  }
  SUBCASE("duplicate key") {
    CHECK_THROWS_AS(parse_config(std::string(kBaselineFile) + "lambda_es = 0.1\n"), ConfigError);
  }
  SUBCASE("line without =") { CHECK_THROWS_AS(parse_config_entries("p_pd_success 0.3\n"), ConfigError); }
  SUBCASE("bad numbers and modes") {
    CHECK_THROWS(parse_config(std::string(kBaselineFile) + "seed = -3\n"));
    CHECK_THROWS(parse_config(std::string(kBaselineFile) + "horizon_slots = 12x\n"));
    CHECK_THROWS(parse_config(kBaselineFile, {{"mode", "fast"}}));
    CHECK_THROWS(parse_config(kBaselineFile, {{"policy", "greedy"}}));
    CHECK_THROWS(parse_config(kBaselineFile, {{"burn_in_slots", "300000"}}));
  }
}

TEST_CASE("overrides and defaults") {
  const auto spec = parse_config(kBaselineFile, {{"lambda_es", "0.8"},
                                                 {"policy", "cooperative, noncooperative"},
                                                 {"lambda_p_grid_step", "0.01"},
                                                 {"seed", "7"},
                                                 {"horizon_slots", "50000"}});
  CHECK(spec.params.lambda_es == 0.8);
  REQUIRE(spec.policies.size() == 2);
  CHECK(spec.policies[1].kind == PolicyKind::NonCooperative);
  CHECK(spec.grids.lambda_p.size() == 61);
  CHECK(spec.sim.seed == 7);
  CHECK(spec.sim.horizon_slots == 50000);

  const auto minimal = parse_config("p_pd_success=0.3\np_ss_success=0.4\ns_pd_success=0.7\ns_sd_success=0.7\n");
  CHECK(minimal.params.lambda_ep == 1.0);
  CHECK(minimal.params.lambda_es == 1.0);
  CHECK(minimal.policies.front().kind == PolicyKind::CooperativeRandomized);
  CHECK(minimal.policies.front().access_prob_a == 0.5);

  CHECK(parse_override("seed=3") == std::pair<std::string, std::string>{"seed", "3"});
  CHECK(parse_override(" seed = 3 ") == std::pair<std::string, std::string>{"seed", "3"});
  CHECK_THROWS_AS(parse_override("seed"), ConfigError);
  CHECK_THROWS_AS(parse_override("colour=red"), ConfigError);
  CHECK(config_keys().size() == 18);
}

TEST_CASE("CSV format and round trip") {
  RegionBoundary b;
  b.lambda_p_grid = {0.0, 0.005, 0.01};
  b.lambda_s_max = {0.56, 0.1234567, 0.0};
  b.uncertain = {false, true, false};
  b.label = RegionLabel::NonCooperative;
  b.source = BoundarySource::Simulated;
  const std::string text = format_boundary_csv(b);
  CHECK(text ==
        "lambda_p,lambda_s_max,label,source,uncertain\n"
        "0.000000,0.560000,noncoop,simulated,false\n"
        "0.005000,0.123457,noncoop,simulated,true\n"
        "0.010000,0.000000,noncoop,simulated,false\n");
  const auto back = parse_boundary_csv(text);
  CHECK(back.label == b.label);
  CHECK(back.source == b.source);
  CHECK(back.uncertain == b.uncertain);
  CHECK(format_boundary_csv(back) == text);

  CHECK(format_boundary_csv(RegionBoundary{}) == "lambda_p,lambda_s_max,label,source,uncertain\n");
  CHECK(parse_boundary_csv("lambda_p,lambda_s_max,label,source,uncertain\n").size() == 0);
  CHECK_THROWS(parse_boundary_csv("lambda_p,lambda_s\n"));
  CHECK_THROWS(parse_boundary_csv("lambda_p,lambda_s_max,label,source,uncertain\n0.1,0.2,union\n"));
  CHECK_THROWS(
      parse_boundary_csv("lambda_p,lambda_s_max,label,source,uncertain\n0.1,0.2,union,analytic,maybe\n"));
}

TEST_CASE("CSV round trip over every analytic builtin boundary") {
  for (const auto& spec : builtin_experiments()) {
    const auto r = run_experiment(spec);
    for (const auto& b : r.boundaries) {
      const auto text = format_boundary_csv(b);
      CHECK(format_boundary_csv(parse_boundary_csv(text)) == text);
    }
  }
}

TEST_CASE("emit writes one file per boundary") {
  const auto dir = scratch("emit");
  const auto r = run_experiment(builtin_experiment("fig9"));
  const auto paths = emit_boundary_csv(r, dir / "nested");
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].filename() == "fig9_union_analytic.csv");
  CHECK(paths[1].filename() == "fig9_noncoop_analytic.csv");
  const auto text = slurp(paths[1]);
  CHECK(text.rfind("lambda_p,lambda_s_max,label,source,uncertain\n", 0) == 0);
  CHECK(text.find("0.000000,0.560000,noncoop,analytic,false\n") != std::string::npos);

  // A regular file where the directory should be.
  std::ofstream(dir / "blocker") << "x";
  CHECK_THROWS_AS(emit_boundary_csv(r, dir / "blocker" / "out"), std::runtime_error);
}

TEST_CASE("fig6 CSV ends its nonzero rows by the PU cutoff") {
  const auto dir = scratch("fig6");
  const auto r = run_experiment(builtin_experiment("fig6"));
  emit_boundary_csv(r, dir);
  const auto b = parse_boundary_csv(slurp(dir / "fig6_union_analytic.csv"));
  double last = -1;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.lambda_s_max[i] > 0) last = b.lambda_p_grid[i];
  CHECK(last > 0.3);
  CHECK(last <= 0.348);
}

TEST_CASE("cli: reproduce prints reference comparisons and the seed") {
  const auto dir = scratch("cli_reproduce");
  auto r = cli({"reproduce", "fig9", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("seed 42") != std::string::npos);
  CHECK(r.out.find("crossover_lambda_p_measured: reference 0.075000") != std::string::npos);
  CHECK(fs::exists(dir / "fig9_noncoop_analytic.csv"));

  r = cli({"reproduce", "fig5", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("su_max_lambda_s: reference 0.350000") != std::string::npos);

  r = cli({"reproduce", "fig9", "--set", "seed=9", "--out", dir.string()});
  CHECK(r.out.find("seed 9") != std::string::npos);
}

TEST_CASE("cli: errors exit nonzero and go to stderr") {
  auto r = cli({"reproduce", "nosuchfig"});
  CHECK(r.code != 0);
  CHECK(r.out.empty());
  CHECK(r.err.find("fig10") != std::string::npos);

  r = cli({"region"});
  CHECK(r.code != 0);
  CHECK(r.err.find("--config") != std::string::npos);

  r = cli({"frobnicate"});
  CHECK(r.code != 0);

  r = cli({"reproduce", "fig4", "--set", "bogus=1"});
  CHECK(r.code != 0);
  CHECK(r.err.find("bogus") != std::string::npos);
}

TEST_CASE("cli: region, crossover and list with a config file") {
  const auto dir = scratch("cli_region");
  const auto cfg = dir / "base.cfg";
  std::ofstream(cfg) << kBaselineFile;
  auto r = cli({"region", "--config", cfg.string(), "--set", "lambda_es=0.8", "--set", "lambda_ep=0.5",
                "--set", "policy=cooperative,noncooperative", "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "config_union_analytic.csv"));
  CHECK(r.out.find("seed 42") != std::string::npos);

  r = cli({"crossover", "--config", cfg.string(), "--set", "lambda_es=0.8"});
  CHECK(r.code == 0);
  CHECK(r.out.find("D 2.643678") != std::string::npos);
  CHECK(r.out.find("0.075652") != std::string::npos);

  r = cli({"list"});
  CHECK(r.code == 0);
  CHECK(r.out.find("fig10") != std::string::npos);
}

TEST_CASE("cli binary exit codes") {
  const char* bin = std::getenv("EHCR_BIN");
  if (bin == nullptr) return;
  const std::string quiet = " >/dev/null 2>&1";
  CHECK(std::system((std::string(bin) + " list" + quiet).c_str()) == 0);
  CHECK(std::system((std::string(bin) + " reproduce nosuchfig" + quiet).c_str()) != 0);
}
