#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "snmpc/density.hpp"
#include "snmpc/model.hpp"
#include "snmpc/ocp.hpp"
#include "snmpc/rng.hpp"
#include "snmpc/sde.hpp"

namespace snmpc::mpc {

/// The controller's density at a sampling instant: a normal centered at the
/// measured C_A with this standard deviation, truncated to the grid.
struct MeasurementModel {
  double std_dev = 0.02;
};

struct ClosedLoopConfig {
  double sample_period = 2.0;  // min
  double run_time = 30.0;      // min
  MeasurementModel measurement;
  ocp::OcpSpec ocp;
  ocp::SolverBudget budget;
  /// Euler-Maruyama step of the plant.
  double plant_dt = 0.01;
  /// Plant steps between recorded path samples.
  int record_every = 10;

  void validate() const;
  int n_samples() const;
};

struct StepLog {
  double time = 0.0;
  model::Vector measured_state;
  ocp::OcpSolution solution;
  model::Vector applied_input;
  /// The solver reported infeasible and the previous input was held.
  bool feasibility_alarm = false;
};

struct ClosedLoopResult {
  sde::PathRecord path;
  std::vector<StepLog> steps;
  /// t_0, ..., t_N (N = run_time / sample_period) and the true states there.
  std::vector<double> sample_times;
  std::vector<model::Vector> sample_states;
};

fp::DensityField measured_density(const MeasurementModel& measurement, double measured,
                                  const fp::Grid1D& grid);

/// Receding-horizon loop: at every t_k re-initialize the density from the
/// true state, solve the OCP warm-started from the previous policy shifted by
/// one sample period, and hold u*(0) on the plant until t_k + sample_period.
/// An infeasible solve holds the previous input (the first solve falls back
/// to the least-violating policy).
ClosedLoopResult run_closed_loop(const model::ControlAffineSde& plant,
                                 const ClosedLoopConfig& config, sde::WienerStream& stream,
                                 const model::Vector& x0);

using ConcentrationSampler = std::function<double(std::mt19937_64&)>;

struct MonteCarloOptions {
  int n_realizations = 130;
  std::uint64_t seed = 0;
  std::vector<double> snapshot_times{0.0, 6.0, 12.0, 18.0, 24.0, 30.0};
  /// Draws C_A(0) from the realization's own engine.
  ConcentrationSampler initial_concentration = [](std::mt19937_64& engine) {
    return model::Beta4Distribution(0.0, 2.0, 320.0, 320.0).sample(engine);
  };
  double initial_temperature = 315.0;
  /// Called after each finished realization with (done, total).
  std::function<void(int, int)> progress;
};

struct SolverStatistics {
  int solves = 0;
  int optimal = 0;
  int feasible_suboptimal = 0;
  int infeasible = 0;
  int alarms = 0;
  long evaluations = 0;
};

struct EnsembleRecord {
  std::vector<ClosedLoopResult> realizations;
  /// Failure cause per realization; failed entries have an empty result.
  std::vector<std::optional<std::string>> failures;
  std::vector<double> sample_times;
  /// Fraction of successful realizations with a violated true state.
  std::vector<double> violation_fraction;
  /// Per realization and sampling instant: true state violates the constraint.
  std::vector<std::vector<bool>> violations;
  std::vector<double> mean_lyapunov;
  std::vector<double> snapshot_times;
  std::vector<fp::DensityField> histograms;
  double terminal_mean = 0.0;
  double terminal_variance = 0.0;
  SolverStatistics solver;

  int n_failed() const;
};

/// Realization i of the study: x0 = (C_A(0) drawn from stream (seed, i),
/// initial_temperature), then run_closed_loop on the same stream.
ClosedLoopResult run_realization(const model::ControlAffineSde& plant,
                                 const ClosedLoopConfig& config,
                                 const MonteCarloOptions& options, int i);

/// Independent realizations, realization i on WienerStream(seed, i,
/// plant_dt), run in parallel with OpenMP. Aggregation is ordered by
/// realization id, so the record is identical for any thread count. Throws
/// NumericError if more than 10% of the realizations fail.
EnsembleRecord run_monte_carlo(const model::ControlAffineSde& plant,
                               const ClosedLoopConfig& config, const MonteCarloOptions& options);

/// Serial reference for run_monte_carlo.
EnsembleRecord run_monte_carlo_serial(const model::ControlAffineSde& plant,
                                      const ClosedLoopConfig& config,
                                      const MonteCarloOptions& options);

}  // namespace snmpc::mpc
