#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snmpc/density.hpp"
#include "snmpc/fokker_planck.hpp"
#include "snmpc/mpc.hpp"
#include "snmpc/ocp.hpp"

namespace snmpc::io {

namespace fs = std::filesystem;

void write_json(const fs::path& path, const nlohmann::json& doc);

/// Columns cell_center, mass, density.
void write_density_csv(const fs::path& path, const fp::DensityField& field);

/// File name for a snapshot at time t, e.g. "density_t006.00.csv".
std::string snapshot_name(const std::string& prefix, double t);

nlohmann::json diagnostics_json(const fp::FpDiagnostics& d);
nlohmann::json policy_json(const ControlPolicy& policy);
nlohmann::json report_json(const ocp::ConstraintReport& report);
nlohmann::json solution_json(const ocp::OcpSolution& solution);

/// Columns time, C_A, T, C_A0, Q.
void write_path_csv(const fs::path& path, const sde::PathRecord& record);

/// Columns time, realization, C_A, T, C_A0, Q, violation. The violation flag
/// is the constraint indicator of the true state.
void write_ensemble_csv(const fs::path& path, const mpc::EnsembleRecord& record,
                        const model::StateConstraint& constraint);

/// Columns cell_center, mass, density, reference_mass, reference_density.
void write_histogram_csv(const fs::path& path, const fp::DensityField& histogram,
                         const fp::DensityField& reference);

/// Columns time, violation_fraction, limit, realizations.
void write_violation_csv(const fs::path& path, const mpc::EnsembleRecord& record, double limit);

}  // namespace snmpc::io
