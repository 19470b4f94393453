#include "snmpc/commands.hpp"

#include <omp.h>

#include <memory>
#include <ostream>

#include "snmpc/cstr_density.hpp"
#include "snmpc/error.hpp"
#include "snmpc/io.hpp"
#include "snmpc/metrics.hpp"
#include "snmpc/validation.hpp"

#ifndef SNMPC_VERSION
#define SNMPC_VERSION "unknown"
#endif
#ifndef SNMPC_GIT_REVISION
#define SNMPC_GIT_REVISION "unknown"
#endif

namespace snmpc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kTargetTerminalMean = 0.576;
constexpr double kTargetTerminalVariance = 4.3e-4;

void write_manifest(const config::ExperimentConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs, json extra = json::object()) {
  json m = manifest(cfg, command);
  m["outputs"] = outputs;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  io::write_json(fs::path(cfg.output_dir) / "manifest.json", m);
}

json state_json(const model::Vector& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

}  // namespace

std::string version() { return std::string(SNMPC_VERSION) + "+" + SNMPC_GIT_REVISION; }

config::ExperimentConfig resolve_config(const std::string& path, const Overrides& o) {
  config::ExperimentConfig cfg =
      path.empty() ? config::parse_config(json::object()) : config::load_config(path);
  if (o.seed) {
    cfg.closed_loop.seed = *o.seed;
    cfg.defaulted.erase("/closed_loop/seed");
  }
  if (o.realizations) {
    if (*o.realizations < 1) throw ConfigError("--realizations must be >= 1");
    cfg.closed_loop.realizations = *o.realizations;
    cfg.defaulted.erase("/closed_loop/realizations");
  }
  if (o.workers) {
    if (*o.workers < 0) throw ConfigError("--workers must be >= 0");
    cfg.closed_loop.workers = *o.workers;
    cfg.defaulted.erase("/closed_loop/workers");
  }
  if (o.output_dir) {
    cfg.output_dir = *o.output_dir;
    cfg.defaulted.erase("/output_dir");
  }
  return cfg;
}

json manifest(const config::ExperimentConfig& cfg, const std::string& command) {
  json m;
  m["command"] = command;
  m["version"] = version();
  m["seed"] = cfg.closed_loop.seed;
  m["config"] = config::to_json(cfg);
  m["defaulted"] = cfg.defaulted;
  if (cfg.model == config::ModelType::cstr) {
    const auto ss = config::steady_inputs(cfg);
    m["steady_inputs"] = {{"center", cfg.ocp.center},
                          {"u", state_json(ss.u)},
                          {"residual_norm", ss.residual_norm},
                          {"iterations", ss.iterations}};
  }
  return m;
}

int fp_solve(const config::ExperimentConfig& cfg, std::ostream& log) {
  const auto sys = config::build_model(cfg);
  const auto initial = config::initial_density(cfg);
  const ControlPolicy policy = config::build_fp_policy(cfg);
  std::unique_ptr<fp::AdvectionProfile> advection;
  fp::CstrMeanFieldAdvection* cstr = nullptr;
  if (cfg.model == config::ModelType::cstr) {
    auto p = std::make_unique<fp::CstrMeanFieldAdvection>(cfg.cstr, policy, cfg.initial.temperature);
    cstr = p.get();
    advection = std::move(p);
  } else {
    advection = std::make_unique<fp::SdeCoordinateAdvection>(sys, 0, model::Vector::Zero(1), policy);
  }

  std::vector<double> temperatures;
  auto observe = [&](double, const fp::DensityField&) {
    if (cstr != nullptr) temperatures.push_back(cstr->temperature());
  };
  const auto traj = fp::fp_propagate(initial, *advection, cfg.fp.diffusion, 0.0, cfg.fp.t_end,
                                     cfg.fp.dt_max, cfg.fp.snapshot_times, observe);

  std::optional<fp::DensityField> reference;
  if (cfg.model == config::ModelType::cstr) {
    reference = fp::density_from_normal(cfg.ocp.reference_mean, cfg.ocp.reference_variance,
                                        initial.grid()).field;
  } else if (cfg.model == config::ModelType::ou && cfg.ou.theta > 0.0) {
    const double var = cfg.ou.sigma * cfg.ou.sigma / (2.0 * cfg.ou.theta);
    reference = fp::density_from_normal(0.0, var, initial.grid()).field;
  }

  const fs::path dir(cfg.output_dir);
  std::vector<std::string> outputs;
  json snaps = json::array();
  double worst_reference = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto& field = traj.snapshots[k];
    const std::string name = "snapshots/" + io::snapshot_name("density", traj.times[k]);
    io::write_density_csv(dir / name, field);
    outputs.push_back(name);
    const auto mom = metrics::moments(field);
    json s = {{"time", traj.times[k]}, {"file", name}, {"mean", mom.mean}, {"variance", mom.variance}};
    if (cstr != nullptr) {
      s["temperature"] = temperatures[k];
      s["tail_probability"] =
          metrics::tail_probability(field, cfg.ocp.threshold, metrics::Tail::below).probability;
    }
    if (reference) {
      const double h = metrics::hellinger(field, *reference);
      s["reference_hellinger"] = h;
      worst_reference = std::max(worst_reference, h);
    }
    snaps.push_back(s);
  }

  json diag = {{"diagnostics", io::diagnostics_json(traj.diagnostics)}, {"snapshots", snaps}};
  if (!traj.snapshots.empty()) {
    const auto& first = traj.snapshots.front();
    const auto& last = traj.snapshots.back();
    diag["first_last_hellinger"] = metrics::hellinger(first, last);
    diag["first_last_identical"] = first.masses() == last.masses();
  }
  if (cfg.model == config::ModelType::ou && reference) diag["stationary_hellinger"] = worst_reference;
  io::write_json(dir / "fp_diagnostics.json", diag);
  outputs.push_back("fp_diagnostics.json");
  write_manifest(cfg, "fp-solve", outputs);

  const auto& d = traj.diagnostics;
  log << "fp-solve: " << traj.times.size() << " snapshots, " << d.steps << " steps, mass error "
      << d.max_mass_error << ", clipped " << d.clipped_total << '\n';
  if (diag.contains("stationary_hellinger")) {
    log << "fp-solve: stationary hellinger " << diag["stationary_hellinger"].get<double>() << '\n';
  }
  log << "fp-solve: outputs in " << dir.string() << '\n';
  return exit_ok;
}

int mpc_run(const config::ExperimentConfig& cfg, std::ostream& log) {
  const auto plant = config::build_model(cfg);
  const auto loop = config::build_closed_loop(cfg);
  const auto options = config::build_monte_carlo(cfg);
  const auto res = mpc::run_realization(plant, loop, options, 0);

  const fs::path dir(cfg.output_dir);
  io::write_path_csv(dir / "path.csv", res.path);
  json steps = json::array();
  int alarms = 0;
  for (const auto& s : res.steps) {
    alarms += s.feasibility_alarm ? 1 : 0;
    steps.push_back({{"time", s.time},
                     {"measured_state", state_json(s.measured_state)},
                     {"applied_input", state_json(s.applied_input)},
                     {"feasibility_alarm", s.feasibility_alarm},
                     {"solution", io::solution_json(s.solution)}});
  }
  io::write_json(dir / "solver_log.json", steps);
  json summary = {{"steps", res.steps.size()},
                  {"alarms", alarms},
                  {"clip_events", res.path.clip_events},
                  {"sample_times", res.sample_times},
                  {"final_state", state_json(res.sample_states.back())}};
  io::write_json(dir / "summary.json", summary);
  write_manifest(cfg, "mpc-run", {"path.csv", "solver_log.json", "summary.json"});

  const auto& x = res.sample_states.back();
  log << "mpc-run: " << res.steps.size() << " solves, " << alarms << " feasibility alarms, final C_A "
      << x[0] << ", T " << x[1] << '\n';
  return exit_ok;
}

int montecarlo(const config::ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.closed_loop.workers > 0) omp_set_num_threads(cfg.closed_loop.workers);
  const auto plant = config::build_model(cfg);
  const auto loop = config::build_closed_loop(cfg);
  auto options = config::build_monte_carlo(cfg);
  const int every = std::max(1, options.n_realizations / 10);
  options.progress = [&](int done, int total) {
    if (done % every == 0 || done == total) log << "montecarlo: " << done << "/" << total << '\n' << std::flush;
  };
  const double start = omp_get_wtime();
  const auto rec = mpc::run_monte_carlo(plant, loop, options);
  const double wall = omp_get_wtime() - start;

  const fs::path dir(cfg.output_dir);
  std::vector<std::string> outputs;
  io::write_ensemble_csv(dir / "ensemble.csv", rec, loop.ocp.chance);
  outputs.push_back("ensemble.csv");
  const double limit = loop.ocp.chance.max_violation_probability();
  io::write_violation_csv(dir / "violation_fraction.csv", rec, limit);
  outputs.push_back("violation_fraction.csv");

  json snaps = json::array();
  for (std::size_t k = 0; k < rec.snapshot_times.size(); ++k) {
    const std::string name = "histograms/" + io::snapshot_name("histogram", rec.snapshot_times[k]);
    io::write_histogram_csv(dir / name, rec.histograms[k], loop.ocp.reference);
    outputs.push_back(name);
    const auto mom = metrics::moments(rec.histograms[k]);
    snaps.push_back({{"time", rec.snapshot_times[k]},
                     {"file", name},
                     {"mean", mom.mean},
                     {"variance", mom.variance},
                     {"reference_hellinger", metrics::hellinger(rec.histograms[k], loop.ocp.reference)}});
  }

  long clips = 0;
  json failures = json::array();
  for (std::size_t i = 0; i < rec.realizations.size(); ++i) {
    if (rec.failures[i]) {
      failures.push_back({{"realization", i}, {"cause", *rec.failures[i]}});
    } else {
      clips += rec.realizations[i].path.clip_events;
    }
  }
  double worst = 0.0;
  for (double v : rec.violation_fraction) worst = std::max(worst, v);
  const auto& s = rec.solver;
  json summary = {
      {"realizations", rec.realizations.size()},
      {"failed", rec.n_failed()},
      {"failures", failures},
      {"sample_times", rec.sample_times},
      {"violation_fraction", rec.violation_fraction},
      {"max_violation_fraction", worst},
      {"violation_limit", limit},
      {"mean_lyapunov", rec.mean_lyapunov},
      {"terminal", {{"mean", rec.terminal_mean},
                    {"variance", rec.terminal_variance},
                    {"target_mean", kTargetTerminalMean},
                    {"target_variance", kTargetTerminalVariance}}},
      {"snapshots", snaps},
      {"solver", {{"solves", s.solves},
                  {"optimal", s.optimal},
                  {"feasible_suboptimal", s.feasible_suboptimal},
                  {"infeasible", s.infeasible},
                  {"alarms", s.alarms},
                  {"evaluations", s.evaluations}}},
      {"clip_events", clips}};
  io::write_json(dir / "summary.json", summary);
  outputs.push_back("summary.json");
  write_manifest(cfg, "montecarlo", outputs);

  log << "montecarlo: " << rec.realizations.size() << " realizations (" << rec.n_failed()
      << " failed) in " << wall << " s\n"
      << "montecarlo: max violation fraction " << worst << " (limit " << limit << ")\n"
      << "montecarlo: terminal C_A mean " << rec.terminal_mean << " (target " << kTargetTerminalMean
      << "), variance " << rec.terminal_variance << " (target " << kTargetTerminalVariance << ")\n";
  return exit_ok;
}

int validate(const config::ExperimentConfig& cfg, const ValidateOptions& options, std::ostream& log) {
  validation::Options opt;
  opt.seed = cfg.closed_loop.seed;
  opt.inject_asymmetric_P = options.inject_asymmetric_P;
  const auto results = validation::run_all(opt);
  json report = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    log << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " (value " << r.value
        << ", limit " << r.limit << ")";
    if (!r.detail.empty()) log << " " << r.detail;
    log << '\n';
    report.push_back({{"suite", r.suite},
                      {"name", r.name},
                      {"passed", r.passed},
                      {"value", r.value},
                      {"limit", r.limit},
                      {"detail", r.detail}});
  }
  const fs::path dir(cfg.output_dir);
  io::write_json(dir / "validate.json", {{"passed", all}, {"checks", report}});
  write_manifest(cfg, "validate", {"validate.json"},
                 {{"inject_asymmetric_P", options.inject_asymmetric_P}});
  log << (all ? "validate: all checks passed\n" : "validate: FAILED\n");
  return all ? exit_ok : exit_check_failed;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_numeric;
  }
}

}  // namespace snmpc::cli
