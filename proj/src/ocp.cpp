#include "snmpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snmpc/cstr_density.hpp"
#include "snmpc/error.hpp"
#include "snmpc/metrics.hpp"

namespace snmpc::ocp {

void OcpSpec::validate() const {
  model.validate();
  chance.validate();
  if (!(prediction_horizon >= 0.0) || !(control_horizon > 0.0) ||
      control_horizon > prediction_horizon + 1e-12) {
    throw ConfigError("ocp: horizons must satisfy 0 < T_c <= T_p");
  }
  if (n_intervals < 1) throw ConfigError("ocp: n_intervals must be >= 1");
  if (bounds.size() != 2 || nominal_input.size() != 2) {
    throw ConfigError("ocp: the CSTR problem has two inputs");
  }
  if (input_weight.rows() != 2 || input_weight.cols() != 2) {
    throw ConfigError("ocp: input weight must be 2 x 2");
  }
  if (certificate.P().rows() != 2) throw ConfigError("ocp: certificate must be 2 x 2");
  if (eval_grid.empty()) throw ConfigError("ocp: eval_grid is empty");
  for (std::size_t i = 0; i < eval_grid.size(); ++i) {
    if (eval_grid[i] < -1e-12 || eval_grid[i] > prediction_horizon + 1e-9) {
      throw ConfigError("ocp: eval_grid must lie inside [0, T_p]");
    }
    if (i > 0 && !(eval_grid[i] > eval_grid[i - 1])) {
      throw ConfigError("ocp: eval_grid must be strictly increasing");
    }
  }
  if (!(diffusion >= 0.0) || !(dt_max > 0.0) || !(nominal_dt > 0.0)) {
    throw ConfigError("ocp: diffusion, dt_max and nominal_dt must be valid");
  }
}

std::vector<double> uniform_eval_grid(double horizon, double step) {
  if (!(step > 0.0)) throw ConfigError("eval grid: step must be positive");
  std::vector<double> grid;
  const long n = std::lround(std::floor(horizon / step + 1e-9));
  for (long i = 0; i <= n; ++i) grid.push_back(i * step);
  if (horizon - grid.back() > 1e-9) grid.push_back(horizon);
  return grid;
}

std::vector<double> ConstraintReport::violations() const {
  std::vector<double> v;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (chance_enforced[i]) v.push_back(-chance_margin[i]);
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (stability_enforced[i]) v.push_back(stability_residual[i]);
  }
  return v;
}

double ConstraintReport::worst_violation() const {
  double worst = 0.0;
  for (double v : violations()) worst = std::max(worst, v);
  return worst;
}

namespace {

model::Vector rk4_step(const model::ControlAffineSde& sys, const model::Vector& x,
                       const model::Vector& u, double h) {
  const model::Vector k1 = model::eval_drift(sys, x, u);
  const model::Vector k2 = model::eval_drift(sys, x + 0.5 * h * k1, u);
  const model::Vector k3 = model::eval_drift(sys, x + 0.5 * h * k2, u);
  const model::Vector k4 = model::eval_drift(sys, x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Noise-free trajectory sampled at `times`, starting at times.front().
std::vector<model::Vector> nominal_trajectory(const model::ControlAffineSde& sys,
                                              const ControlPolicy& policy,
                                              model::Vector x, const std::vector<double>& times,
                                              double h_max) {
  std::vector<model::Vector> out;
  out.reserve(times.size());
  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0) {
      const long n = std::max(1L, std::lround(std::ceil(span / h_max - 1e-9)));
      const double h = span / n;
      for (long k = 0; k < n; ++k) x = rk4_step(sys, x, policy.input_at(t + k * h), h);
      t = target;
    }
    out.push_back(x);
  }
  return out;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) sum += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

}  // namespace

PolicyEvaluation evaluate_policy(const OcpSpec& spec, const ControlPolicy& policy,
                                 const fp::DensityField& initial, double initial_temperature) {
  if (!(initial.grid() == spec.reference.grid())) {
    throw ConfigError("ocp: initial density and reference use different grids");
  }
  const model::ControlAffineSde sys = model::build_cstr(spec.model);
  const auto& grid = spec.eval_grid;
  PolicyEvaluation out;

  fp::CstrMeanFieldAdvection advection(spec.model, policy, initial_temperature);
  ConstraintReport& rep = out.report;
  const double cap = spec.chance.max_violation_probability();
  const metrics::Tail tail = spec.chance.violated_above ? metrics::Tail::above : metrics::Tail::below;
  auto observe = [&](double t, const fp::DensityField& field) {
    out.hellinger.push_back(metrics::hellinger(field, spec.reference));
    out.temperature.push_back(advection.temperature());
    rep.times.push_back(t);
    rep.chance_margin.push_back(cap - metrics::tail_probability(field, spec.chance.threshold, tail).probability);
    // The density at t = 0 is the measurement; no decision variable acts on it.
    rep.chance_enforced.push_back(t > 1e-12);
  };
  const auto traj = fp::fp_propagate(initial, advection, spec.diffusion, 0.0,
                                     spec.prediction_horizon, spec.dt_max, grid, observe);
  out.diagnostics = traj.diagnostics;

  model::Vector x0(2);
  x0 << metrics::moments(initial).mean, initial_temperature;
  out.nominal_states = nominal_trajectory(sys, policy, x0, grid, spec.nominal_dt);

  std::vector<double> integrand(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const model::Vector& u = policy.input_at(grid[i]);
    const model::Vector& x = out.nominal_states[i];
    double value = out.hellinger[i] + u.dot(spec.input_weight * u);
    if (spec.objective == ObjectiveForm::temperature_tracking) {
      const double dT = out.temperature[i] - spec.target_temperature;
      value += dT * dT;
    }
    integrand[i] = value;

    rep.stability_residual.push_back(lyap::stability_residual(spec.certificate, sys, x, u));
    bool enforced = true;
    if (spec.stability_outside_noise_floor) {
      enforced = spec.certificate.gamma() * lyap::lyapunov_value(spec.certificate, x) >
                 lyap::diffusion_term(spec.certificate, sys, x);
    }
    rep.stability_enforced.push_back(enforced);
  }
  out.objective = trapezoid(grid, integrand);
  return out;
}

double evaluate_objective(const OcpSpec& spec, const ControlPolicy& policy,
                          const fp::DensityField& initial, double initial_temperature) {
  return evaluate_policy(spec, policy, initial, initial_temperature).objective;
}

ConstraintReport evaluate_constraints(const OcpSpec& spec, const ControlPolicy& policy,
                                      const fp::DensityField& initial,
                                      double initial_temperature) {
  return evaluate_policy(spec, policy, initial, initial_temperature).report;
}

OcpSolution solve_ocp(const OcpSpec& spec, const fp::DensityField& initial,
                      double initial_temperature, const std::optional<ControlPolicy>& warm_start,
                      const SolverBudget& budget) {
  spec.validate();
  const ControlPolicy layout =
      ControlPolicy::constant(spec.control_horizon, spec.n_intervals, spec.nominal_input);
  ControlPolicy start = layout;
  if (warm_start) {
    if (warm_start->size() != layout.size() || warm_start->input_dim() != 2) {
      throw ConfigError("solve_ocp: warm start does not match the interval layout");
    }
    start = layout.with_inputs(warm_start->flatten());
  }
  start = start.projected(spec.bounds);

  const int m = 2;
  Eigen::VectorXd lower(spec.n_intervals * m), upper(spec.n_intervals * m);
  for (int i = 0; i < spec.n_intervals; ++i) {
    lower.segment(i * m, m) = spec.bounds.lower();
    upper.segment(i * m, m) = spec.bounds.upper();
  }

  auto evaluate = [&](const Eigen::VectorXd& z) {
    Evaluation e;
    try {
      const PolicyEvaluation pe =
          evaluate_policy(spec, layout.with_inputs(z), initial, initial_temperature);
      e.objective = pe.objective;
      e.violations = pe.report.violations();
    } catch (const Error& err) {
      e.ok = false;
      e.objective = std::numeric_limits<double>::infinity();
      e.error = err.what();
    }
    return e;
  };

  SolverBudget search_budget = budget;
  if (warm_start) search_budget.initial_step = budget.warm_start_step;
  const SearchResult sr =
      minimize_penalized(evaluate, lower, upper, start.flatten(), search_budget);
  ControlPolicy policy = layout.with_inputs(sr.point);
  const PolicyEvaluation final_eval = evaluate_policy(spec, policy, initial, initial_temperature);
  OcpSolution sol{std::move(policy), final_eval.objective, final_eval.report, sr.status,
                  sr.evaluations, sr.round_history, sr.failures};
  if (sol.report.worst_violation() > budget.feasibility_tolerance) {
    sol.status = SolveStatus::infeasible;
  }
  return sol;
}

}  // namespace snmpc::ocp
