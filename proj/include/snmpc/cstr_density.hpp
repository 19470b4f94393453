#pragma once

#include <vector>

#include "snmpc/fokker_planck.hpp"
#include "snmpc/model.hpp"
#include "snmpc/policy.hpp"

namespace snmpc::fp {

/// Advection of the C_A density for the CSTR.
///
/// The C_A drift depends on the temperature, which is not resolved by the
/// density. T(t) is carried as a deterministic state driven by the current
/// density mean:
///
///   dT/dt = F/V (T0 - T) + dH/(rho cp) k(T) E[C_A] + Q/(rho cp V)
///
/// advanced by explicit Euler alongside each density step, and frozen into
/// the face velocities a(x) = F/V (C_A0 - x) - k(T) x of the next step.
class CstrMeanFieldAdvection : public AdvectionProfile {
 public:
  CstrMeanFieldAdvection(const model::CstrParameters& params, ControlPolicy policy,
                         double initial_temperature);

  void face_velocities(double t, const Grid1D& grid, std::span<const double> masses,
                       std::span<double> out) override;
  void advance(double t, double dt, const Grid1D& grid, std::span<const double> masses) override;

  double temperature() const { return temperature_; }
  const ControlPolicy& policy() const { return policy_; }

 private:
  model::CstrParameters params_;
  ControlPolicy policy_;
  double temperature_;
  std::vector<double> centers_;
};

}  // namespace snmpc::fp
