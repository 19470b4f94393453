#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snmpc/direct_search.hpp"
#include "snmpc/model.hpp"
#include "snmpc/mpc.hpp"
#include "snmpc/ocp.hpp"

namespace snmpc::config {

enum class ModelType { cstr, ou, zero };

struct OuSettings {
  double theta = 1.0;
  double sigma = 0.5;
  double half_width = 2.5;
};

/// Initial C_A distribution (or x for the scalar models) and initial T.
struct InitialSettings {
  std::string kind = "beta";  // beta | normal
  double lower = 0.0;
  double upper = 2.0;
  double alpha = 320.0;
  double beta = 320.0;
  double mean = 0.57;
  double variance = 4e-4;
  double temperature = 315.0;
};

struct FpSettings {
  double grid_lower = 0.0;
  double grid_upper = 2.0;
  int n_cells = 200;
  double diffusion = 0.001;
  double dt_max = 0.05;
  double t_end = 30.0;
  std::vector<double> snapshot_times{0.0, 6.0, 12.0, 18.0, 24.0, 30.0};
  /// Fixed policy for fp-solve. Empty inputs: hold the steady-state inputs
  /// (CSTR) or zero (scalar models) over t_end.
  std::vector<double> durations;
  std::vector<std::vector<double>> inputs;
};

struct OcpSettings {
  double prediction_horizon = 30.0;
  double control_horizon = 20.0;
  int n_intervals = 5;
  std::string objective = "temperature_tracking";  // | input_weight
  std::vector<double> input_weight{0.0, 0.0, 0.0, 0.0};  // row-major 2 x 2
  double target_temperature = 317.0;
  double threshold = 0.53;
  double confidence = 0.95;
  double gamma = 0.1;
  std::vector<double> P{3.18, 0.93, 0.93, 0.58};  // row-major 2 x 2
  std::vector<double> center{0.57, 317.0};
  bool stability_outside_noise_floor = true;
  std::vector<double> input_lower{0.0, -10.0};
  std::vector<double> input_upper{2.0, 10.0};
  double reference_mean = 0.57;
  double reference_variance = 4e-4;
  double eval_step = 1.0;
  double nominal_dt = 0.1;
  ocp::SolverBudget budget;
};

struct ClosedLoopSettings {
  double sample_period = 2.0;
  double run_time = 30.0;
  double measurement_std = 0.02;
  double plant_dt = 0.01;
  int record_every = 10;
  int realizations = 130;
  std::uint64_t seed = 2024;
  /// 0 keeps the OpenMP default.
  int workers = 0;
  std::vector<double> snapshot_times{0.0, 6.0, 12.0, 18.0, 24.0, 30.0};
};

struct ExperimentConfig {
  ModelType model = ModelType::cstr;
  model::CstrParameters cstr;
  OuSettings ou;
  InitialSettings initial;
  FpSettings fp;
  OcpSettings ocp;
  ClosedLoopSettings closed_loop;
  std::string output_dir = "out";
  /// JSON pointers of every field filled in from a default.
  std::set<std::string> defaulted;
};

/// Strict parse: unknown keys and type errors throw ConfigError naming the
/// JSON pointer of the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
/// Resolved configuration, defaults included.
nlohmann::json to_json(const ExperimentConfig& cfg);

const char* to_string(ModelType type);

model::ControlAffineSde build_model(const ExperimentConfig& cfg);
fp::Grid1D build_grid(const ExperimentConfig& cfg);
/// Steady inputs at ocp.center (CSTR only).
model::SteadyStateInputs steady_inputs(const ExperimentConfig& cfg);
fp::DensityField initial_density(const ExperimentConfig& cfg);
model::Beta4Distribution initial_beta(const ExperimentConfig& cfg);
ocp::OcpSpec build_ocp(const ExperimentConfig& cfg);
mpc::ClosedLoopConfig build_closed_loop(const ExperimentConfig& cfg);
mpc::MonteCarloOptions build_monte_carlo(const ExperimentConfig& cfg);
ControlPolicy build_fp_policy(const ExperimentConfig& cfg);

}  // namespace snmpc::config
