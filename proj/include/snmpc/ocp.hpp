#pragma once

#include <optional>
#include <vector>

#include "snmpc/density.hpp"
#include "snmpc/direct_search.hpp"
#include "snmpc/fokker_planck.hpp"
#include "snmpc/lyapunov.hpp"
#include "snmpc/model.hpp"
#include "snmpc/policy.hpp"

namespace snmpc::ocp {

enum class ObjectiveForm {
  /// Hellinger distance + (E[T] - T_target)^2 (+ u' R u).
  temperature_tracking,
  /// Hellinger distance + u' R u.
  input_weight,
};

/// Finite-horizon density-shaping problem for the CSTR C_A density.
struct OcpSpec {
  model::CstrParameters model;
  double prediction_horizon = 30.0;  // T_p, min
  double control_horizon = 20.0;     // T_c, min
  int n_intervals = 5;
  fp::DensityField reference;
  ObjectiveForm objective = ObjectiveForm::temperature_tracking;
  model::Matrix input_weight = model::Matrix::Zero(2, 2);
  double target_temperature = 317.0;
  model::StateConstraint chance{0, 0.53, false, 0.95};
  lyap::LyapunovCertificate certificate;
  /// Only enforce the decay condition where gamma V exceeds the Ito term
  /// Tr(h' P h), i.e. outside the neighbourhood of the set point in which
  /// additive noise makes the condition unsatisfiable for every input.
  bool stability_outside_noise_floor = true;
  model::InputBounds bounds;
  /// Objective quadrature and constraint sample instants in [0, T_p].
  std::vector<double> eval_grid;
  double diffusion = 0.001;
  double dt_max = 0.05;
  /// RK4 step for the noise-free nominal trajectory.
  double nominal_dt = 0.1;
  /// Initial guess when no warm start is supplied.
  model::Vector nominal_input;

  void validate() const;
};

/// Instants 0, step, 2 step, ..., horizon.
std::vector<double> uniform_eval_grid(double horizon, double step);

struct ConstraintReport {
  std::vector<double> times;
  /// (1 - confidence) - Pr{violation}; satisfied when >= 0.
  std::vector<double> chance_margin;
  std::vector<bool> chance_enforced;
  /// stability_residual along the nominal trajectory; satisfied when <= 0.
  std::vector<double> stability_residual;
  std::vector<bool> stability_enforced;

  /// Violation amounts of the enforced constraints (chance first).
  std::vector<double> violations() const;
  double worst_violation() const;
};

struct PolicyEvaluation {
  double objective = 0.0;
  ConstraintReport report;
  std::vector<double> hellinger;
  std::vector<double> temperature;
  std::vector<model::Vector> nominal_states;
  fp::FpDiagnostics diagnostics;
};

/// Propagates `initial` under `policy` over [0, T_p] and evaluates objective
/// and constraints on spec.eval_grid in one pass.
PolicyEvaluation evaluate_policy(const OcpSpec& spec, const ControlPolicy& policy,
                                 const fp::DensityField& initial, double initial_temperature);

double evaluate_objective(const OcpSpec& spec, const ControlPolicy& policy,
                          const fp::DensityField& initial, double initial_temperature);

ConstraintReport evaluate_constraints(const OcpSpec& spec, const ControlPolicy& policy,
                                      const fp::DensityField& initial,
                                      double initial_temperature);

struct OcpSolution {
  ControlPolicy policy;
  double objective = 0.0;
  ConstraintReport report;
  SolveStatus status = SolveStatus::infeasible;
  int evaluations = 0;
  std::vector<std::vector<double>> round_history;
  std::vector<std::string> failures;
};

OcpSolution solve_ocp(const OcpSpec& spec, const fp::DensityField& initial,
                      double initial_temperature, const std::optional<ControlPolicy>& warm_start,
                      const SolverBudget& budget);

}  // namespace snmpc::ocp
