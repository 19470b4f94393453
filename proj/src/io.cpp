#include "snmpc/io.hpp"

#include <cstdio>
#include <fstream>

#include "snmpc/error.hpp"

namespace snmpc::io {

using nlohmann::json;

namespace {

std::ofstream open(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(12);
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void write_json(const fs::path& path, const json& doc) {
  auto out = open(path);
  out << doc.dump(2) << '\n';
}

void write_density_csv(const fs::path& path, const fp::DensityField& field) {
  auto out = open(path);
  out << "cell_center,mass,density\n";
  const auto& grid = field.grid();
  for (int i = 0; i < grid.n_cells(); ++i) {
    out << grid.center(i) << ',' << field.mass(i) << ',' << field.density(i) << '\n';
  }
}

std::string snapshot_name(const std::string& prefix, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_t%06.2f.csv", prefix.c_str(), t);
  return buf;
}

json diagnostics_json(const fp::FpDiagnostics& d) {
  return {{"steps", d.steps},
          {"max_mass_error", d.max_mass_error},
          {"clipped_total", d.clipped_total},
          {"clipped_max_step", d.clipped_max_step},
          {"min_dt", d.min_dt},
          {"max_dt", d.max_dt}};
}

json policy_json(const ControlPolicy& policy) {
  json intervals = json::array();
  for (const auto& iv : policy.intervals()) {
    intervals.push_back({{"duration", iv.duration}, {"input", to_std(iv.input)}});
  }
  return intervals;
}

json report_json(const ocp::ConstraintReport& r) {
  return {{"times", r.times},
          {"chance_margin", r.chance_margin},
          {"chance_enforced", r.chance_enforced},
          {"stability_residual", r.stability_residual},
          {"stability_enforced", r.stability_enforced},
          {"worst_violation", r.worst_violation()}};
}

json solution_json(const ocp::OcpSolution& s) {
  return {{"status", ocp::to_string(s.status)},
          {"objective", s.objective},
          {"evaluations", s.evaluations},
          {"policy", policy_json(s.policy)},
          {"constraint_report", report_json(s.report)},
          {"round_history", s.round_history},
          {"evaluation_failures", s.failures}};
}

void write_path_csv(const fs::path& path, const sde::PathRecord& rec) {
  auto out = open(path);
  out << "time,C_A,T,C_A0,Q\n";
  for (std::size_t k = 0; k < rec.size(); ++k) {
    out << rec.times[k] << ',' << rec.states[k][0] << ',' << rec.states[k][1] << ','
        << rec.inputs[k][0] << ',' << rec.inputs[k][1] << '\n';
  }
}

void write_ensemble_csv(const fs::path& path, const mpc::EnsembleRecord& record,
                        const model::StateConstraint& constraint) {
  auto out = open(path);
  out << "time,realization,C_A,T,C_A0,Q,violation\n";
  for (std::size_t r = 0; r < record.realizations.size(); ++r) {
    if (record.failures[r]) continue;
    const auto& rec = record.realizations[r].path;
    for (std::size_t k = 0; k < rec.size(); ++k) {
      const auto& x = rec.states[k];
      const bool violated = constraint.threshold_fn(x)[0] >= 0.0;
      out << rec.times[k] << ',' << r << ',' << x[0] << ',' << x[1] << ',' << rec.inputs[k][0]
          << ',' << rec.inputs[k][1] << ',' << (violated ? 1 : 0) << '\n';
    }
  }
}

void write_histogram_csv(const fs::path& path, const fp::DensityField& histogram,
                         const fp::DensityField& reference) {
  if (!(histogram.grid() == reference.grid())) {
    throw ConfigError("histogram and reference use different grids");
  }
  auto out = open(path);
  out << "cell_center,mass,density,reference_mass,reference_density\n";
  const auto& grid = histogram.grid();
  for (int i = 0; i < grid.n_cells(); ++i) {
    out << grid.center(i) << ',' << histogram.mass(i) << ',' << histogram.density(i) << ','
        << reference.mass(i) << ',' << reference.density(i) << '\n';
  }
}

void write_violation_csv(const fs::path& path, const mpc::EnsembleRecord& record, double limit) {
  auto out = open(path);
  out << "time,violation_fraction,limit,realizations\n";
  const int n_ok = static_cast<int>(record.realizations.size()) - record.n_failed();
  for (std::size_t k = 0; k < record.sample_times.size(); ++k) {
    out << record.sample_times[k] << ',' << record.violation_fraction[k] << ',' << limit << ','
        << n_ok << '\n';
  }
}

}  // namespace snmpc::io
