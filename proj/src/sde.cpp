#include "snmpc/sde.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include "snmpc/error.hpp"

namespace snmpc::sde {

long PathRecord::index_of(double t) const {
  const double eps = 1e-9 * std::max(1.0, std::abs(t));
  auto it = std::lower_bound(times.begin(), times.end(), t - eps);
  if (it == times.end() || std::abs(*it - t) > eps) return -1;
  return static_cast<long>(std::distance(times.begin(), it));
}

void EulerMaruyama::step(Vector& x, const Vector& u, WienerStream& stream, double t) {
  const double dt = stream.dt();
  Vector next = x + dt * model::eval_drift(sys_, x, u);
  if (sys_.noise_dim() > 0) {
    stream.increment(dw_);
    next.noalias() += model::eval_diffusion(sys_, x) * dw_;
  }
  if (!next.allFinite()) {
    std::ostringstream msg;
    msg << "euler-maruyama: state diverged at t = " << t;
    throw DivergenceError(msg.str(), t);
  }
  const model::Box& box = sys_.domain();
  for (int i = 0; i < next.size(); ++i) {
    if (next[i] < box.lower[i]) {
      next[i] = box.lower[i];
      ++clip_events_;
    } else if (next[i] > box.upper[i]) {
      next[i] = box.upper[i];
      ++clip_events_;
    }
  }
  x = std::move(next);
}

namespace {

long steps_for(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const long n = std::lround(ratio);
  if (std::abs(ratio - n) > 1e-6 || n < 0) {
    throw ConfigError(std::string("simulate_path: dt does not divide ") + what);
  }
  return n;
}

}  // namespace

PathRecord simulate_path(const model::ControlAffineSde& sys, const Vector& x0,
                         const ControlPolicy& policy, WienerStream& stream, double t_end,
                         int record_every) {
  if (x0.size() != sys.state_dim()) throw ConfigError("simulate_path: x0 has wrong size");
  if (record_every < 1) throw ConfigError("simulate_path: record_every must be >= 1");
  const double dt = stream.dt();
  const long n_steps = steps_for(t_end, dt, "t_end");
  for (const auto& iv : policy.intervals()) steps_for(iv.duration, dt, "a policy interval");

  EulerMaruyama em(sys);
  PathRecord rec;
  Vector x = x0;
  auto record = [&](long k) {
    const double t = k * dt;
    rec.times.push_back(t);
    rec.states.push_back(x);
    rec.inputs.push_back(policy.input_at(t));
  };
  record(0);
  for (long k = 0; k < n_steps; ++k) {
    const double t = k * dt;
    em.step(x, policy.input_at(t), stream, t);
    if ((k + 1) % record_every == 0 || k + 1 == n_steps) record(k + 1);
  }
  rec.clip_events = em.clip_events();
  return rec;
}

namespace {

PathRecord run_one(const model::ControlAffineSde& sys, const InitialSampler& x0_sampler,
                   const ControlPolicy& policy, int i, const EnsembleOptions& opt) {
  WienerStream stream(opt.seed, static_cast<std::uint64_t>(i), opt.dt);
  const Vector x0 = x0_sampler(stream);
  return simulate_path(sys, x0, policy, stream, opt.t_end, opt.record_every);
}

[[noreturn]] void report_failures(const std::vector<std::optional<std::string>>& errors) {
  std::ostringstream msg;
  msg << "ensemble: realization(s) failed:";
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) msg << " [" << i << "] " << *errors[i] << ";";
  }
  throw NumericError(msg.str());
}

}  // namespace

std::vector<PathRecord> simulate_ensemble(const model::ControlAffineSde& sys,
                                          const InitialSampler& x0_sampler,
                                          const ControlPolicy& policy, int n_paths,
                                          const EnsembleOptions& options) {
  if (n_paths < 1) throw ConfigError("simulate_ensemble: n_paths must be >= 1");
  std::vector<PathRecord> out(n_paths);
  std::vector<std::optional<std::string>> errors(n_paths);
  bool failed = false;
#pragma omp parallel for schedule(dynamic) reduction(|| : failed)
  for (int i = 0; i < n_paths; ++i) {
    try {
      out[i] = run_one(sys, x0_sampler, policy, i, options);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      failed = true;
    }
  }
  if (failed) report_failures(errors);
  return out;
}

std::vector<PathRecord> simulate_ensemble_serial(const model::ControlAffineSde& sys,
                                                 const InitialSampler& x0_sampler,
                                                 const ControlPolicy& policy, int n_paths,
                                                 const EnsembleOptions& options) {
  if (n_paths < 1) throw ConfigError("simulate_ensemble: n_paths must be >= 1");
  std::vector<PathRecord> out(n_paths);
  std::vector<std::optional<std::string>> errors(n_paths);
  bool failed = false;
  for (int i = 0; i < n_paths; ++i) {
    try {
      out[i] = run_one(sys, x0_sampler, policy, i, options);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      failed = true;
    }
  }
  if (failed) report_failures(errors);
  return out;
}

fp::DensityField empirical_histogram(const std::vector<double>& samples,
                                     const fp::Grid1D& grid) {
  if (samples.empty()) throw ConfigError("empirical_histogram: no samples");
  std::vector<double> counts(grid.n_cells(), 0.0);
  for (double s : samples) {
    if (!std::isfinite(s)) throw NumericError("empirical_histogram: non-finite sample");
    counts[grid.locate(s)] += 1.0;
  }
  return fp::DensityField::from_weights(grid, std::move(counts));
}

fp::DensityField empirical_histogram(const std::vector<PathRecord>& records, int coordinate,
                                     double t, const fp::Grid1D& grid) {
  std::vector<double> samples;
  samples.reserve(records.size());
  for (const auto& rec : records) {
    const long k = rec.index_of(t);
    if (k < 0) {
      std::ostringstream msg;
      msg << "empirical_histogram: t = " << t << " is not on the record grid";
      throw ConfigError(msg.str());
    }
    if (coordinate < 0 || coordinate >= rec.states[k].size()) {
      throw ConfigError("empirical_histogram: coordinate out of range");
    }
    samples.push_back(rec.states[k][coordinate]);
  }
  return empirical_histogram(samples, grid);
}

void write_ensemble_csv(std::ostream& out, const std::vector<PathRecord>& records,
                        const std::vector<std::string>& state_names,
                        const std::vector<std::string>& input_names) {
  out << "time,realization_id";
  for (const auto& n : state_names) out << ',' << n;
  for (const auto& n : input_names) out << ',' << n;
  out << '\n';
  out.precision(12);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    for (std::size_t k = 0; k < rec.size(); ++k) {
      out << rec.times[k] << ',' << r;
      for (int i = 0; i < rec.states[k].size(); ++i) out << ',' << rec.states[k][i];
      for (int i = 0; i < rec.inputs[k].size(); ++i) out << ',' << rec.inputs[k][i];
      out << '\n';
    }
  }
}

}  // namespace snmpc::sde
