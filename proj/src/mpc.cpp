#include "snmpc/mpc.hpp"

#include <cmath>
#include <sstream>

#include "snmpc/error.hpp"
#include "snmpc/fokker_planck.hpp"
#include "snmpc/lyapunov.hpp"
#include "snmpc/metrics.hpp"

namespace snmpc::mpc {

void ClosedLoopConfig::validate() const {
  ocp.validate();
  if (!(sample_period > 0.0) || !(run_time > 0.0)) {
    throw ConfigError("closed loop: sample_period and run_time must be positive");
  }
  const double ratio = run_time / sample_period;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ConfigError("closed loop: sample_period must divide run_time");
  }
  if (sample_period > ocp.control_horizon + 1e-12) {
    throw ConfigError("closed loop: sample_period must not exceed the control horizon");
  }
  const double steps = sample_period / plant_dt;
  if (!(plant_dt > 0.0) || std::abs(steps - std::round(steps)) > 1e-6) {
    throw ConfigError("closed loop: plant_dt must divide sample_period");
  }
  if (record_every < 1) throw ConfigError("closed loop: record_every must be >= 1");
  if (!(measurement.std_dev > 0.0)) throw ConfigError("closed loop: measurement std_dev must be positive");
}

int ClosedLoopConfig::n_samples() const {
  return static_cast<int>(std::lround(run_time / sample_period));
}

fp::DensityField measured_density(const MeasurementModel& measurement, double measured,
                                  const fp::Grid1D& grid) {
  return fp::density_from_normal(measured, measurement.std_dev * measurement.std_dev, grid).field;
}

ClosedLoopResult run_closed_loop(const model::ControlAffineSde& plant,
                                 const ClosedLoopConfig& config, sde::WienerStream& stream,
                                 const model::Vector& x0) {
  config.validate();
  if (!plant.domain().contains(x0)) throw ConfigError("closed loop: x0 outside the model domain");
  if (std::abs(stream.dt() - config.plant_dt) > 1e-15) {
    throw ConfigError("closed loop: stream dt differs from plant_dt");
  }
  const fp::Grid1D& grid = config.ocp.reference.grid();
  const long steps_per_sample = std::lround(config.sample_period / config.plant_dt);
  const int coordinate = config.ocp.chance.coordinate;

  ClosedLoopResult res;
  sde::EulerMaruyama em(plant);
  model::Vector x = x0;
  std::optional<ControlPolicy> warm;
  std::optional<model::Vector> previous_input;
  long global_step = 0;

  auto record = [&](const model::Vector& u) {
    res.path.times.push_back(global_step * config.plant_dt);
    res.path.states.push_back(x);
    res.path.inputs.push_back(u);
  };

  for (int k = 0; k < config.n_samples(); ++k) {
    const double t_k = k * config.sample_period;
    res.sample_times.push_back(t_k);
    res.sample_states.push_back(x);

    const fp::DensityField density = measured_density(config.measurement, x[coordinate], grid);
    StepLog log{t_k, x, ocp::solve_ocp(config.ocp, density, x[1], warm, config.budget), {}, false};
    log.feasibility_alarm = log.solution.status == ocp::SolveStatus::infeasible;
    if (log.feasibility_alarm && previous_input) {
      log.applied_input = *previous_input;
    } else {
      log.applied_input = log.solution.policy.input_at(0.0);
    }
    warm = log.solution.policy.shifted(config.sample_period);
    previous_input = log.applied_input;

    const model::Vector u = log.applied_input;
    if (k == 0) record(u);
    for (long s = 0; s < steps_per_sample; ++s) {
      em.step(x, u, stream, global_step * config.plant_dt);
      ++global_step;
      if (global_step % config.record_every == 0 || s + 1 == steps_per_sample) record(u);
    }
    res.steps.push_back(std::move(log));
  }
  res.sample_times.push_back(config.n_samples() * config.sample_period);
  res.sample_states.push_back(x);
  res.path.clip_events = em.clip_events();
  return res;
}

ClosedLoopResult run_realization(const model::ControlAffineSde& plant,
                                 const ClosedLoopConfig& config,
                                 const MonteCarloOptions& options, int i) {
  sde::WienerStream stream(options.seed, static_cast<std::uint64_t>(i), config.plant_dt);
  model::Vector x0(2);
  x0 << options.initial_concentration(stream.engine()), options.initial_temperature;
  return run_closed_loop(plant, config, stream, x0);
}

namespace {

void aggregate(const ClosedLoopConfig& config, const MonteCarloOptions& options,
               EnsembleRecord& rec) {
  const int n = static_cast<int>(rec.realizations.size());
  if (rec.n_failed() * 10 > n) {
    std::ostringstream msg;
    msg << "monte carlo: " << rec.n_failed() << " of " << n << " realizations failed:";
    for (int i = 0; i < n; ++i) {
      if (rec.failures[i]) msg << " [" << i << "] " << *rec.failures[i] << ";";
    }
    throw NumericError(msg.str());
  }
  std::vector<int> ok;
  for (int i = 0; i < n; ++i) {
    if (!rec.failures[i]) ok.push_back(i);
  }

  const auto& spec = config.ocp;
  const int coordinate = spec.chance.coordinate;
  rec.sample_times = rec.realizations[ok.front()].sample_times;
  const std::size_t n_t = rec.sample_times.size();
  rec.violation_fraction.assign(n_t, 0.0);
  rec.mean_lyapunov.assign(n_t, 0.0);
  rec.violations.assign(n, std::vector<bool>(n_t, false));
  for (int i : ok) {
    const auto& r = rec.realizations[i];
    for (std::size_t k = 0; k < n_t; ++k) {
      const model::Vector& x = r.sample_states[k];
      const bool violated = spec.chance.threshold_fn(x)[0] >= 0.0;
      rec.violations[i][k] = violated;
      rec.violation_fraction[k] += violated ? 1.0 : 0.0;
      rec.mean_lyapunov[k] += lyap::lyapunov_value(spec.certificate, x);
    }
    for (const auto& step : r.steps) {
      auto& s = rec.solver;
      ++s.solves;
      s.evaluations += step.solution.evaluations;
      s.alarms += step.feasibility_alarm ? 1 : 0;
      switch (step.solution.status) {
        case ocp::SolveStatus::optimal: ++s.optimal; break;
        case ocp::SolveStatus::feasible_suboptimal: ++s.feasible_suboptimal; break;
        case ocp::SolveStatus::infeasible: ++s.infeasible; break;
      }
    }
  }
  const double n_ok = static_cast<double>(ok.size());
  for (std::size_t k = 0; k < n_t; ++k) {
    rec.violation_fraction[k] /= n_ok;
    rec.mean_lyapunov[k] /= n_ok;
  }

  std::vector<double> terminal;
  for (int i : ok) terminal.push_back(rec.realizations[i].sample_states.back()[coordinate]);
  double mean = 0.0;
  for (double v : terminal) mean += v;
  mean /= n_ok;
  double var = 0.0;
  for (double v : terminal) var += (v - mean) * (v - mean);
  rec.terminal_mean = mean;
  rec.terminal_variance = ok.size() > 1 ? var / (n_ok - 1.0) : 0.0;

  std::vector<sde::PathRecord> paths;
  for (int i : ok) paths.push_back(rec.realizations[i].path);
  rec.snapshot_times = options.snapshot_times;
  for (double t : options.snapshot_times) {
    rec.histograms.push_back(sde::empirical_histogram(paths, coordinate, t, spec.reference.grid()));
  }
}

}  // namespace

int EnsembleRecord::n_failed() const {
  int count = 0;
  for (const auto& f : failures) count += f ? 1 : 0;
  return count;
}

EnsembleRecord run_monte_carlo(const model::ControlAffineSde& plant,
                               const ClosedLoopConfig& config, const MonteCarloOptions& options) {
  config.validate();
  if (options.n_realizations < 1) throw ConfigError("monte carlo: n_realizations must be >= 1");
  const int n = options.n_realizations;
  EnsembleRecord rec;
  rec.realizations.resize(n);
  rec.failures.resize(n);
  int done = 0;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      rec.realizations[i] = run_realization(plant, config, options, i);
    } catch (const std::exception& e) {
      rec.failures[i] = e.what();
    }
    if (options.progress) {
#pragma omp critical(snmpc_progress)
      options.progress(++done, n);
    }
  }
  aggregate(config, options, rec);
  return rec;
}

EnsembleRecord run_monte_carlo_serial(const model::ControlAffineSde& plant,
                                      const ClosedLoopConfig& config,
                                      const MonteCarloOptions& options) {
  config.validate();
  if (options.n_realizations < 1) throw ConfigError("monte carlo: n_realizations must be >= 1");
  const int n = options.n_realizations;
  EnsembleRecord rec;
  rec.realizations.resize(n);
  rec.failures.resize(n);
  for (int i = 0; i < n; ++i) {
    try {
      rec.realizations[i] = run_realization(plant, config, options, i);
    } catch (const std::exception& e) {
      rec.failures[i] = e.what();
    }
    if (options.progress) options.progress(i + 1, n);
  }
  aggregate(config, options, rec);
  return rec;
}

}  // namespace snmpc::mpc
