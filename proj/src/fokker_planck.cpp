#include "snmpc/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "snmpc/error.hpp"

namespace snmpc::fp {

FpCoefficients FpCoefficients::uniform(const Grid1D& grid, double velocity, double diffusion) {
  return {std::vector<double>(grid.n_cells() + 1, velocity),
          std::vector<double>(grid.n_cells(), diffusion)};
}

void FpCoefficients::validate(const Grid1D& grid) const {
  if (static_cast<int>(advection.size()) != grid.n_cells() + 1 ||
      static_cast<int>(diffusion.size()) != grid.n_cells()) {
    throw ConfigError("fp coefficients: sizes must be n_cells + 1 faces and n_cells cells");
  }
  for (double a : advection) {
    if (!std::isfinite(a)) throw NumericError("fp coefficients: advection not finite");
  }
  for (double d : diffusion) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw NumericError("fp coefficients: diffusion must be finite and non-negative");
    }
  }
}

namespace {

/// Largest total outflow rate of any cell: upwind flux through interior faces
/// plus diffusion through both faces. `finite` is cleared by any NaN or Inf
/// face velocity. Boundary faces carry no flux.
double max_outflow_rate(double dx, std::span<const double> advection,
                        std::span<const double> face_diff, bool& finite) {
  const double* a = advection.data();
  const double* d = face_diff.data();
  const std::size_t n = advection.size() - 1;
  const double inv_dx = 1.0 / dx, inv_dx2 = inv_dx * inv_dx;
  double rate = 0.0;
  double probe = 0.0;
#pragma omp simd reduction(max : rate) reduction(+ : probe)
  for (std::size_t i = 0; i < n; ++i) {
    const double right = i + 1 < n ? std::max(a[i + 1], 0.0) : 0.0;
    const double left = i > 0 ? std::max(-a[i], 0.0) : 0.0;
    rate = std::max(rate, (right + left) * inv_dx + (d[i] + d[i + 1]) * inv_dx2);
    probe += a[i] * 0.0;
  }
  finite = std::isfinite(probe + a[n] * 0.0);
  return rate;
}

double bound_from_rate(double rate, double dx, double max_d) {
  rate = std::max(rate, 2.0 * max_d / (dx * dx));
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return 0.9 / rate;
}

}  // namespace

double stable_time_step(const Grid1D& grid, std::span<const double> advection,
                        std::span<const double> diffusion) {
  const auto n = static_cast<std::size_t>(grid.n_cells());
  if (advection.size() != n + 1 || diffusion.size() != n) {
    throw ConfigError("stable_time_step: coefficient sizes do not match the grid");
  }
  const std::vector<double> faces = detail::face_diffusion(diffusion);
  bool finite = true;
  const double rate = max_outflow_rate(grid.dx(), advection, faces, finite);
  if (!finite) throw NumericError("stable_time_step: advection not finite");
  double max_d = 0.0;
  for (double d : diffusion) max_d = std::max(max_d, d);
  return bound_from_rate(rate, grid.dx(), max_d);
}

namespace detail {

double upwind_update(double dx, std::span<const double> masses,
                     std::span<const double> advection, std::span<const double> face_diffusion,
                     double dt, std::span<double> out, std::span<double> flux,
                     double* raw_total) {
  const std::size_t n = masses.size();
  const double inv_dx = 1.0 / dx;
  const double* m = masses.data();
  const double* a = advection.data();
  const double* d = face_diffusion.data();
  double* f = flux.data();
  f[0] = 0.0;
  f[n] = 0.0;
#pragma omp simd
  for (std::size_t j = 1; j < n; ++j) {
    const double left = m[j - 1] * inv_dx;
    const double right = m[j] * inv_dx;
    f[j] = std::max(a[j], 0.0) * left + std::min(a[j], 0.0) * right - d[j] * (right - left) * inv_dx;
  }
  double total = 0.0;
  double negative = 0.0;
  double* o = out.data();
#pragma omp simd reduction(+ : total, negative)
  for (std::size_t i = 0; i < n; ++i) {
    const double v = m[i] - dt * (f[i + 1] - f[i]);
    o[i] = v;
    total += v;
    negative += std::min(v, 0.0);
  }
  if (raw_total != nullptr) *raw_total = total;
  if (negative < 0.0) {
    double kept = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      o[i] = std::max(o[i], 0.0);
      kept += o[i];
    }
    for (std::size_t i = 0; i < n; ++i) o[i] /= kept;
  }
  return -negative;
}

std::vector<double> face_diffusion(std::span<const double> cell_diffusion) {
  const std::size_t n = cell_diffusion.size();
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t j = 1; j < n; ++j) out[j] = 0.5 * (cell_diffusion[j - 1] + cell_diffusion[j]);
  return out;
}

}  // namespace detail

FpStepResult fp_step(const DensityField& field, const FpCoefficients& coeffs, double dt) {
  const Grid1D& grid = field.grid();
  coeffs.validate(grid);
  const double bound = stable_time_step(grid, coeffs.advection, coeffs.diffusion);
  if (!(dt >= 0.0) || dt > bound * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "fp_step: dt = " << dt << " violates the stability bound " << bound;
    throw StepSizeError(msg.str());
  }
  std::vector<double> out(grid.n_cells());
  std::vector<double> flux(grid.n_cells() + 1);
  const double clipped = detail::upwind_update(grid.dx(), field.masses(), coeffs.advection,
                                               detail::face_diffusion(coeffs.diffusion), dt, out,
                                               flux);
  return {DensityField::from_masses(grid, std::move(out)), clipped};
}

DensityField density_from_beta(const model::Beta4Distribution& dist, const Grid1D& grid) {
  const double tol = 1e-12 * (grid.upper() - grid.lower());
  if (dist.lower() < grid.lower() - tol || dist.upper() > grid.upper() + tol) {
    throw ConfigError("density_from_beta: distribution support extends beyond the grid");
  }
  std::vector<double> w(grid.n_cells());
  double prev = dist.cdf(grid.face(0));
  for (int i = 0; i < grid.n_cells(); ++i) {
    const double next = dist.cdf(grid.face(i + 1));
    w[i] = std::max(next - prev, 0.0);
    prev = next;
  }
  return DensityField::from_weights(grid, std::move(w));
}

NormalDiscretization density_from_normal(double mean, double variance, const Grid1D& grid) {
  if (!(variance > 0.0) || !std::isfinite(mean)) {
    throw ConfigError("density_from_normal: variance must be positive");
  }
  const double sd = std::sqrt(variance);
  auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); };
  std::vector<double> w(grid.n_cells());
  double prev = cdf(grid.face(0));
  const double inside_lower = prev;
  for (int i = 0; i < grid.n_cells(); ++i) {
    const double next = cdf(grid.face(i + 1));
    w[i] = std::max(next - prev, 0.0);
    prev = next;
  }
  const double truncated = inside_lower + (1.0 - prev);
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) {
    throw ConfigError("density_from_normal: no probability mass falls on the grid");
  }
  return {DensityField::from_weights(grid, std::move(w)), truncated, truncated > 0.01};
}

void FunctionAdvection::face_velocities(double t, const Grid1D& grid,
                                        std::span<const double>, std::span<double> out) {
  for (int j = 0; j <= grid.n_cells(); ++j) out[j] = velocity_(t, grid.face(j));
}

SdeCoordinateAdvection::SdeCoordinateAdvection(const model::ControlAffineSde& sys,
                                               int coordinate, model::Vector frozen_state,
                                               ControlPolicy policy)
    : sys_(sys), coordinate_(coordinate), state_(std::move(frozen_state)),
      policy_(std::move(policy)) {
  if (coordinate_ < 0 || coordinate_ >= sys.state_dim()) {
    throw ConfigError("advection: coordinate out of range");
  }
  if (state_.size() != sys.state_dim()) throw ConfigError("advection: frozen state has wrong size");
}

void SdeCoordinateAdvection::face_velocities(double t, const Grid1D& grid,
                                             std::span<const double>, std::span<double> out) {
  const model::Vector& u = policy_.input_at(t);
  model::Vector x = state_;
  for (int j = 0; j <= grid.n_cells(); ++j) {
    x[coordinate_] = grid.face(j);
    out[j] = model::eval_drift(sys_, x, u)[coordinate_];
  }
}

FpTrajectory fp_propagate(const DensityField& initial, AdvectionProfile& profile,
                          double diffusion, double t0, double t1, double dt_max,
                          std::span<const double> sample_times,
                          const SnapshotObserver& observer) {
  if (!(t1 >= t0)) throw ConfigError("fp_propagate: t_span must be ordered");
  if (!(dt_max > 0.0)) throw ConfigError("fp_propagate: dt_max must be positive");
  if (!(diffusion >= 0.0)) throw ConfigError("fp_propagate: diffusion must be non-negative");
  std::vector<double> samples(sample_times.begin(), sample_times.end());
  std::sort(samples.begin(), samples.end());
  const double eps = 1e-9 * std::max(1.0, std::abs(t1));
  for (double s : samples) {
    if (s < t0 - eps || s > t1 + eps) {
      throw ConfigError("fp_propagate: sample instant outside the time span");
    }
  }

  const Grid1D& grid = initial.grid();
  const int n = grid.n_cells();
  std::vector<double> masses = initial.masses();
  std::vector<double> next(n);
  std::vector<double> flux(n + 1);
  std::vector<double> velocity(n + 1);
  const std::vector<double> diff_faces = detail::face_diffusion(std::vector<double>(n, diffusion));

  FpTrajectory traj;
  traj.diagnostics.min_dt = std::numeric_limits<double>::infinity();
  std::size_t next_sample = 0;
  auto emit = [&](double t) {
    traj.times.push_back(t);
    traj.snapshots.push_back(DensityField::from_masses(grid, masses));
    if (observer) observer(t, traj.snapshots.back());
  };

  double t = t0;
  while (next_sample < samples.size() && samples[next_sample] <= t + eps) {
    emit(samples[next_sample]);
    ++next_sample;
  }

  while (t < t1 - eps) {
    profile.face_velocities(t, grid, masses, velocity);
    bool finite = true;
    const double rate = max_outflow_rate(grid.dx(), velocity, diff_faces, finite);
    if (!finite) throw NumericError("fp_propagate: advection not finite");
    const double target = next_sample < samples.size() ? std::min(samples[next_sample], t1) : t1;
    double dt = std::min({dt_max, bound_from_rate(rate, grid.dx(), diffusion), target - t});
    const bool lands = dt >= target - t - eps;
    if (lands) dt = target - t;

    double raw_total = 1.0;
    const double clipped =
        detail::upwind_update(grid.dx(), masses, velocity, diff_faces, dt, next, flux,
                              &raw_total);
    profile.advance(t, dt, grid, masses);
    masses.swap(next);
    t = lands ? target : t + dt;

    auto& d = traj.diagnostics;
    ++d.steps;
    d.max_mass_error = std::max(d.max_mass_error, std::abs(raw_total - 1.0));
    d.clipped_total += clipped;
    d.clipped_max_step = std::max(d.clipped_max_step, clipped);
    d.min_dt = std::min(d.min_dt, dt);
    d.max_dt = std::max(d.max_dt, dt);

    while (next_sample < samples.size() && samples[next_sample] <= t + eps) {
      emit(samples[next_sample]);
      ++next_sample;
    }
  }
  if (traj.diagnostics.steps == 0) traj.diagnostics.min_dt = 0.0;
  // Round-off drift over many steps; the final mass error is also reported.
  double total = 0.0;
  for (double m : masses) total += m;
  traj.diagnostics.max_mass_error = std::max(traj.diagnostics.max_mass_error, std::abs(total - 1.0));
  return traj;
}

}  // namespace snmpc::fp
