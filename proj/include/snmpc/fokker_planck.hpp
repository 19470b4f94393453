#pragma once

#include <functional>
#include <span>
#include <vector>

#include "snmpc/density.hpp"
#include "snmpc/model.hpp"
#include "snmpc/policy.hpp"

namespace snmpc::fp {

/// Coefficients of the one-dimensional Fokker-Planck operator
///
///   dP/dt = -d(a P)/dx + d/dx (D dP/dx)
///
/// `advection` holds a(x) at the n + 1 cell faces; `diffusion` holds D per
/// cell. D multiplies the second derivative directly, i.e. D = h^2 / 2 for a
/// scalar SDE dx = a dt + h dw.
struct FpCoefficients {
  std::vector<double> advection;
  std::vector<double> diffusion;

  static FpCoefficients uniform(const Grid1D& grid, double velocity, double diffusion);
  void validate(const Grid1D& grid) const;
};

/// Largest step that keeps every cell mass non-negative, with a 0.9 safety
/// factor: 0.9 over the largest per-cell outflow rate (upwind flux through the
/// interior faces plus diffusion through both faces), and never above
/// 0.9 dx^2 / (2 max D). Infinite when the operator vanishes.
double stable_time_step(const Grid1D& grid, std::span<const double> advection,
                        std::span<const double> diffusion);

struct FpStepResult {
  DensityField field;
  /// Negative mass removed after the update, before renormalization.
  double clipped_mass = 0.0;
};

/// One forward-Euler finite-volume step with first-order upwind advective
/// fluxes, central diffusive fluxes and zero flux through both boundaries.
/// Throws StepSizeError when dt exceeds stable_time_step.
FpStepResult fp_step(const DensityField& field, const FpCoefficients& coeffs, double dt);

/// Cell masses from exact CDF differences. The distribution support must lie
/// inside the grid.
DensityField density_from_beta(const model::Beta4Distribution& dist, const Grid1D& grid);

struct NormalDiscretization {
  DensityField field;
  /// Probability mass of N(mean, variance) outside the grid, folded back in
  /// by renormalization.
  double truncated_mass = 0.0;
  /// Set when truncated_mass exceeds 1%.
  bool truncation_warning = false;
};

NormalDiscretization density_from_normal(double mean, double variance, const Grid1D& grid);

/// Time-dependent advection velocity a(t, x) at the cell faces. Profiles may
/// carry exogenous state that evolves with the density (see advance()), so a
/// profile instance belongs to a single propagation.
class AdvectionProfile {
 public:
  virtual ~AdvectionProfile() = default;

  virtual void face_velocities(double t, const Grid1D& grid, std::span<const double> masses,
                               std::span<double> out) = 0;

  /// Called after each accepted step [t, t + dt] with the masses at t.
  virtual void advance(double /*t*/, double /*dt*/, const Grid1D& /*grid*/,
                       std::span<const double> /*masses*/) {}
};

/// a(t, x) given as a plain function.
class FunctionAdvection : public AdvectionProfile {
 public:
  explicit FunctionAdvection(std::function<double(double t, double x)> velocity)
      : velocity_(std::move(velocity)) {}

  void face_velocities(double t, const Grid1D& grid, std::span<const double> masses,
                       std::span<double> out) override;

 private:
  std::function<double(double, double)> velocity_;
};

/// Drift of one coordinate of a ControlAffineSde with every other coordinate
/// frozen at `frozen_state`, under a piecewise-constant policy.
class SdeCoordinateAdvection : public AdvectionProfile {
 public:
  SdeCoordinateAdvection(const model::ControlAffineSde& sys, int coordinate,
                         model::Vector frozen_state, ControlPolicy policy);

  void face_velocities(double t, const Grid1D& grid, std::span<const double> masses,
                       std::span<double> out) override;

 private:
  const model::ControlAffineSde& sys_;
  int coordinate_;
  model::Vector state_;
  ControlPolicy policy_;
};

struct FpDiagnostics {
  long steps = 0;
  /// max over steps of |sum of masses - 1| before clipping.
  double max_mass_error = 0.0;
  double clipped_total = 0.0;
  double clipped_max_step = 0.0;
  double min_dt = 0.0;
  double max_dt = 0.0;
};

struct FpTrajectory {
  std::vector<double> times;
  std::vector<DensityField> snapshots;
  FpDiagnostics diagnostics;
};

using SnapshotObserver = std::function<void(double t, const DensityField& field)>;

/// Integrates from t0 to t1 with dt = min(dt_max, stable_time_step), landing
/// exactly on every requested sample instant. `observer`, when set, sees each
/// snapshot as it is produced (the profile's exogenous state is then current).
FpTrajectory fp_propagate(const DensityField& initial, AdvectionProfile& profile,
                          double diffusion, double t0, double t1, double dt_max,
                          std::span<const double> sample_times,
                          const SnapshotObserver& observer = {});

namespace detail {

/// Kernel behind fp_step: writes the updated masses to `out` and returns the
/// clipped negative mass. `flux` and `face_diffusion` have n + 1 entries.
/// Also reports the pre-clip total mass through `raw_total`.
double upwind_update(double dx, std::span<const double> masses,
                     std::span<const double> advection, std::span<const double> face_diffusion,
                     double dt, std::span<double> out, std::span<double> flux,
                     double* raw_total = nullptr);

/// Arithmetic mean of neighbouring cell values at interior faces, zero at
/// the boundary faces.
std::vector<double> face_diffusion(std::span<const double> cell_diffusion);

}  // namespace detail

}  // namespace snmpc::fp
