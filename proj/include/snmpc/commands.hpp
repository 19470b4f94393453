#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "snmpc/config.hpp"

namespace snmpc::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_numeric = 3,
  exit_check_failed = 4,
};

/// Command-line flags that take precedence over the configuration file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
};

/// Defaults when `path` is empty, then the overrides.
config::ExperimentConfig resolve_config(const std::string& path, const Overrides& overrides);

/// Resolved config, defaulted fields, seed and code version.
nlohmann::json manifest(const config::ExperimentConfig& cfg, const std::string& command);

int fp_solve(const config::ExperimentConfig& cfg, std::ostream& log);
int mpc_run(const config::ExperimentConfig& cfg, std::ostream& log);
int montecarlo(const config::ExperimentConfig& cfg, std::ostream& log);

struct ValidateOptions {
  bool inject_asymmetric_P = false;
};
int validate(const config::ExperimentConfig& cfg, const ValidateOptions& options, std::ostream& log);

/// Runs `body`, mapping ConfigError to 2 and any other library error to 3.
int guarded(const std::function<int()>& body, std::ostream& err);

std::string version();

}  // namespace snmpc::cli
