#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "snmpc/commands.hpp"

using namespace snmpc;

int main(int argc, char** argv) {
  CLI::App app{"Density-shaping stochastic NMPC toolkit"};
  app.set_version_flag("--version", cli::version());
  app.require_subcommand(1);

  std::string config_path;
  cli::Overrides overrides;
  std::uint64_t seed = 0;
  int realizations = 0, workers = 0;
  std::string output_dir;
  app.add_option("--config", config_path, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* real_opt = app.add_option("--realizations", realizations, "Monte Carlo realizations");
  auto* work_opt = app.add_option("--workers", workers, "Concurrent realizations (0 = all cores)");
  auto* out_opt = app.add_option("--output-dir", output_dir, "Output directory");

  auto* fp_cmd = app.add_subcommand("fp-solve", "Propagate the density under a fixed policy");
  auto* mpc_cmd = app.add_subcommand("mpc-run", "One closed-loop realization");
  auto* mc_cmd = app.add_subcommand("montecarlo", "Closed-loop Monte Carlo study");
  auto* val_cmd = app.add_subcommand("validate", "Built-in property suites");
  cli::ValidateOptions vopt;
  val_cmd->add_flag("--inject-asymmetric-P", vopt.inject_asymmetric_P,
                    "Perturb the benchmark P into a non-symmetric matrix");

  // Flags are accepted before or after the subcommand.
  for (auto* sub : {fp_cmd, mpc_cmd, mc_cmd, val_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::exit_config;
  }
  if (seed_opt->count()) overrides.seed = seed;
  if (real_opt->count()) overrides.realizations = realizations;
  if (work_opt->count()) overrides.workers = workers;
  if (out_opt->count()) overrides.output_dir = output_dir;

  return cli::guarded(
      [&] {
        const auto cfg = cli::resolve_config(config_path, overrides);
        if (*fp_cmd) return cli::fp_solve(cfg, std::cout);
        if (*mpc_cmd) return cli::mpc_run(cfg, std::cout);
        if (*mc_cmd) return cli::montecarlo(cfg, std::cout);
        return cli::validate(cfg, vopt, std::cout);
      },
      std::cerr);
}
