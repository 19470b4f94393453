#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "snmpc/commands.hpp"
#include "snmpc/config.hpp"
#include "snmpc/error.hpp"

using namespace snmpc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string config_error(const json& doc) {
  try {
    config::parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("snmpc_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST(Config, EmptyDocumentGivesBenchmarkDefaults) {
  const auto cfg = config::parse_config(json::object());
  EXPECT_EQ(cfg.model, config::ModelType::cstr);
  EXPECT_EQ(cfg.fp.n_cells, 200);
  EXPECT_DOUBLE_EQ(cfg.fp.diffusion, 0.001);
  EXPECT_DOUBLE_EQ(cfg.cstr.sigma_CA, 0.32);
  EXPECT_DOUBLE_EQ(cfg.ocp.threshold, 0.53);
  EXPECT_DOUBLE_EQ(cfg.ocp.confidence, 0.95);
  EXPECT_EQ(cfg.closed_loop.realizations, 130);
  EXPECT_TRUE(cfg.defaulted.count("/fp/n_cells"));
  EXPECT_TRUE(cfg.defaulted.count("/ocp/solver/max_evaluations"));
}

TEST(Config, ExplicitFieldsAreNotDefaulted) {
  const auto cfg = config::parse_config({{"fp", {{"n_cells", 100}}}});
  EXPECT_EQ(cfg.fp.n_cells, 100);
  EXPECT_FALSE(cfg.defaulted.count("/fp/n_cells"));
}

TEST(Config, UnknownKeyNamesItsPath) {
  const std::string msg = config_error({{"fp", {{"n_cells", 100}, {"dx", 0.01}}}});
  EXPECT_NE(msg.find("/fp/dx"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown key"), std::string::npos) << msg;
  EXPECT_NE(config_error({{"ocp", {{"solver", {{"max_evals", 3}}}}}}).find("/ocp/solver/max_evals"),
            std::string::npos);
}

TEST(Config, TypeErrorsNameTheirPath) {
  EXPECT_NE(config_error({{"fp", {{"n_cells", "many"}}}}).find("/fp/n_cells"), std::string::npos);
  EXPECT_NE(config_error({{"fp", {{"n_cells", 2.5}}}}).find("expected an integer"), std::string::npos);
  EXPECT_NE(config_error({{"ocp", {{"P", {1, 2, "x", 4}}}}}).find("/ocp/P/2"), std::string::npos);
  EXPECT_NE(config_error({{"closed_loop", {{"seed", -1}}}}).find("/closed_loop/seed"), std::string::npos);
  EXPECT_NE(config_error(json::array()).find("expected an object"), std::string::npos);
}

TEST(Config, ValueErrorsNameTheirPath) {
  EXPECT_NE(config_error({{"fp", {{"n_cells", 1}}}}).find("/fp/n_cells"), std::string::npos);
  EXPECT_NE(config_error({{"ocp", {{"confidence", 1.0}}}}).find("/ocp/confidence"), std::string::npos);
  EXPECT_NE(config_error({{"ocp", {{"center", {0.57}}}}}).find("/ocp/center"), std::string::npos);
  EXPECT_NE(config_error({{"model", {{"type", "pendulum"}}}}).find("/model/type"), std::string::npos);
  EXPECT_NE(config_error({{"closed_loop", {{"snapshot_times", {0, 40}}}}}).find("/closed_loop/snapshot_times"),
            std::string::npos);
}

TEST(Config, RoundTripThroughJson) {
  const auto a = config::parse_config({{"ocp", {{"threshold", 0.5}}}, {"closed_loop", {{"seed", 9}}}});
  const auto b = config::parse_config(config::to_json(a));
  EXPECT_EQ(config::to_json(a), config::to_json(b));
  EXPECT_DOUBLE_EQ(b.ocp.threshold, 0.5);
  EXPECT_EQ(b.closed_loop.seed, 9u);
}

TEST(Config, OuDefaultsFollowTheModel) {
  const auto cfg = config::parse_config({{"model", {{"type", "ou"}, {"ou", {{"sigma", 0.4}}}}}});
  EXPECT_DOUBLE_EQ(cfg.fp.grid_lower, -2.5);
  EXPECT_DOUBLE_EQ(cfg.fp.diffusion, 0.08);
  EXPECT_EQ(cfg.initial.kind, "normal");
  EXPECT_DOUBLE_EQ(cfg.initial.variance, 0.08);
  EXPECT_THROW(config::build_ocp(cfg), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"cstr_benchmark", "cstr_low_noise", "cstr_noise_free", "cstr_infeasible",
                           "ou_benchmark", "zero_dynamics"}) {
    const fs::path p = fs::path(SNMPC_SOURCE_DIR) / "config" / (std::string(name) + ".json");
    EXPECT_NO_THROW(config::load_config(p.string())) << name;
  }
  const auto bench = config::load_config(std::string(SNMPC_SOURCE_DIR) + "/config/cstr_benchmark.json");
  EXPECT_EQ(config::to_json(bench)["model"], config::to_json(config::parse_config(json::object()))["model"]);
}

TEST(Config, MissingFileIsAConfigError) {
  EXPECT_THROW(config::load_config("/nonexistent/snmpc.json"), ConfigError);
}

TEST(Config, InitialSamplers) {
  std::mt19937_64 e(1);
  auto point = config::parse_config({{"initial", {{"kind", "point"}, {"mean", 0.61}}}});
  EXPECT_EQ(config::build_monte_carlo(point).initial_concentration(e), 0.61);
  auto normal = config::parse_config({{"initial", {{"kind", "normal"}, {"mean", 1.99}, {"variance", 1.0}}}});
  const auto s = config::build_monte_carlo(normal).initial_concentration;
  for (int i = 0; i < 100; ++i) {
    const double x = s(e);
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 2.0);
  }
}

TEST(Config, SteadyInputsOfTheBenchmark) {
  const auto ss = config::steady_inputs(config::parse_config(json::object()));
  EXPECT_NEAR(ss.u[0], 0.5708185891, 1e-8);
  EXPECT_NEAR(ss.u[1], 8.6714401475, 1e-7);
}

TEST(Cli, OverridesReplaceDefaults) {
  cli::Overrides o;
  o.seed = 5;
  o.realizations = 7;
  o.output_dir = "elsewhere";
  const auto cfg = cli::resolve_config("", o);
  EXPECT_EQ(cfg.closed_loop.seed, 5u);
  EXPECT_EQ(cfg.closed_loop.realizations, 7);
  EXPECT_FALSE(cfg.defaulted.count("/closed_loop/seed"));
  EXPECT_TRUE(cfg.defaulted.count("/closed_loop/workers"));
  o.realizations = 0;
  EXPECT_THROW(cli::resolve_config("", o), ConfigError);
}

TEST(Cli, GuardedMapsErrorsToExitCodes) {
  std::ostringstream err;
  EXPECT_EQ(cli::guarded([] { return 0; }, err), cli::exit_ok);
  EXPECT_EQ(cli::guarded([]() -> int { throw ConfigError("x"); }, err), cli::exit_config);
  EXPECT_EQ(cli::guarded([]() -> int { throw NumericError("x"); }, err), cli::exit_numeric);
  EXPECT_EQ(cli::guarded([]() -> int { throw StepSizeError("x"); }, err), cli::exit_numeric);
  EXPECT_EQ(cli::guarded([] { return static_cast<int>(json::parse("{").size()); }, err), cli::exit_config);
}

TEST(Cli, FpSolveWritesSnapshotsAndManifest) {
  auto cfg = config::parse_config(json::object());
  cfg.output_dir = scratch("fp").string();
  std::ostringstream log;
  ASSERT_EQ(cli::fp_solve(cfg, log), cli::exit_ok);
  const fs::path dir(cfg.output_dir);
  EXPECT_EQ(count_lines(dir / "snapshots" / "density_t030.00.csv"), 201);
  const json m = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["command"], "fp-solve");
  EXPECT_EQ(m["seed"], 2024);
  EXPECT_EQ(m["outputs"].size(), 7u);
  EXPECT_TRUE(m.contains("defaulted"));
  const json d = json::parse(slurp(dir / "fp_diagnostics.json"));
  EXPECT_LE(d["diagnostics"]["max_mass_error"].get<double>(), 1e-9);
}

TEST(Cli, FpSolveZeroDynamicsKeepsTheDensity) {
  auto cfg = config::parse_config({{"model", {{"type", "zero"}}}, {"fp", {{"t_end", 5.0}, {"snapshot_times", {0, 5}}}}});
  cfg.output_dir = scratch("zero").string();
  std::ostringstream log;
  ASSERT_EQ(cli::fp_solve(cfg, log), cli::exit_ok);
  const json d = json::parse(slurp(fs::path(cfg.output_dir) / "fp_diagnostics.json"));
  EXPECT_TRUE(d["first_last_identical"].get<bool>());
}

TEST(Cli, FpSolveOuReportsStationaryHellinger) {
  auto cfg = config::load_config(std::string(SNMPC_SOURCE_DIR) + "/config/ou_benchmark.json");
  cfg.output_dir = scratch("ou").string();
  std::ostringstream log;
  ASSERT_EQ(cli::fp_solve(cfg, log), cli::exit_ok);
  const json d = json::parse(slurp(fs::path(cfg.output_dir) / "fp_diagnostics.json"));
  EXPECT_LE(d["stationary_hellinger"].get<double>(), 0.02);
}

TEST(Cli, MpcRunLogsFifteenSolvesAndIsReproducible) {
  auto cfg = config::parse_config({{"ocp", {{"solver", {{"max_evaluations", 12}}}}}});
  std::ostringstream log;
  cfg.output_dir = scratch("mpc_a").string();
  ASSERT_EQ(cli::mpc_run(cfg, log), cli::exit_ok);
  const fs::path a(cfg.output_dir);
  cfg.output_dir = scratch("mpc_b").string();
  ASSERT_EQ(cli::mpc_run(cfg, log), cli::exit_ok);
  const fs::path b(cfg.output_dir);
  EXPECT_EQ(json::parse(slurp(a / "solver_log.json")).size(), 15u);
  EXPECT_EQ(slurp(a / "path.csv"), slurp(b / "path.csv"));
  EXPECT_EQ(slurp(a / "solver_log.json"), slurp(b / "solver_log.json"));
}

TEST(Cli, MpcRunNoiseFreeSteadyStateIsFlat) {
  auto cfg = config::load_config(std::string(SNMPC_SOURCE_DIR) + "/config/cstr_noise_free.json");
  cfg.ocp.budget.max_evaluations = 40;
  cfg.closed_loop.run_time = 10.0;
  cfg.closed_loop.snapshot_times = {0.0, 10.0};
  cfg.output_dir = scratch("flat").string();
  std::ostringstream log;
  ASSERT_EQ(cli::mpc_run(cfg, log), cli::exit_ok);
  std::ifstream in(fs::path(cfg.output_dir) / "path.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time,C_A,T,C_A0,Q");
  while (std::getline(in, line)) {
    double t, ca, T;
    char c;
    std::istringstream row(line);
    row >> t >> c >> ca >> c >> T;
    EXPECT_NEAR(ca, 0.57, 0.02) << line;
    EXPECT_NEAR(T, 317.0, 0.5) << line;
  }
}

TEST(Cli, MontecarloOutputs) {
  auto cfg = config::parse_config({{"ocp", {{"solver", {{"max_evaluations", 10}}}}},
                                   {"closed_loop", {{"run_time", 4.0}, {"snapshot_times", {0, 2, 4}}}}});
  std::ostringstream log;
  cfg.closed_loop.realizations = 3;
  cfg.closed_loop.seed = 11;
  cfg.output_dir = scratch("mc_a").string();
  ASSERT_EQ(cli::montecarlo(cfg, log), cli::exit_ok);
  const fs::path a(cfg.output_dir);
  cfg.output_dir = scratch("mc_b").string();
  ASSERT_EQ(cli::montecarlo(cfg, log), cli::exit_ok);
  const fs::path b(cfg.output_dir);
  EXPECT_EQ(slurp(a / "ensemble.csv"), slurp(b / "ensemble.csv"));
  EXPECT_EQ(count_lines(a / "violation_fraction.csv"), 1 + 3);
  const json s = json::parse(slurp(a / "summary.json"));
  EXPECT_EQ(s["violation_fraction"].size(), 3u);
  EXPECT_DOUBLE_EQ(s["terminal"]["target_mean"].get<double>(), 0.576);
  for (const auto& snap : s["snapshots"]) {
    std::ifstream in(a / snap["file"].get<std::string>());
    std::string line;
    std::getline(in, line);
    double total = 0.0;
    while (std::getline(in, line)) {
      std::istringstream row(line);
      double center, mass;
      char c;
      row >> center >> c >> mass;
      total += mass;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Cli, ValidateInjectionFails) {
  auto cfg = config::parse_config(json::object());
  cfg.output_dir = scratch("val").string();
  std::ostringstream log;
  EXPECT_EQ(cli::validate(cfg, {}, log), cli::exit_ok);
  EXPECT_EQ(cli::validate(cfg, {true}, log), cli::exit_check_failed);
  EXPECT_NE(log.str().find("FAIL lyapunov: benchmark certificate invariants"), std::string::npos);
}
