#include "snmpc/cstr_density.hpp"

#include <cmath>

#include "snmpc/error.hpp"

namespace snmpc::fp {

CstrMeanFieldAdvection::CstrMeanFieldAdvection(const model::CstrParameters& params,
                                               ControlPolicy policy,
                                               double initial_temperature)
    : params_(params), policy_(std::move(policy)), temperature_(initial_temperature) {
  params_.validate();
  if (policy_.input_dim() != 2) throw ConfigError("cstr advection: policy must have 2 inputs");
}

void CstrMeanFieldAdvection::face_velocities(double t, const Grid1D& grid,
                                             std::span<const double>, std::span<double> out) {
  const double feed = policy_.input_at(t)[0];
  const double residence = params_.residence_rate();
  const double k = params_.arrhenius(temperature_);
  const double x0 = grid.lower();
  const double dx = grid.dx();
  for (int j = 0; j <= grid.n_cells(); ++j) {
    const double x = x0 + j * dx;
    out[j] = residence * (feed - x) - k * x;
  }
}

void CstrMeanFieldAdvection::advance(double t, double dt, const Grid1D& grid,
                                     std::span<const double> masses) {
  if (centers_.size() != masses.size()) centers_ = grid.centers();
  double mean = 0.0;
  const double* c = centers_.data();
  const double* m = masses.data();
  const std::size_t n = masses.size();
#pragma omp simd reduction(+ : mean)
  for (std::size_t i = 0; i < n; ++i) mean += m[i] * c[i];
  const double heat = policy_.input_at(t)[1];
  const double rate = params_.residence_rate() * (params_.T0 - temperature_) +
                      params_.heating_coefficient() * params_.arrhenius(temperature_) * mean +
                      params_.heat_input_coefficient() * heat;
  temperature_ += dt * rate;
  if (!std::isfinite(temperature_)) {
    throw NumericError("cstr advection: temperature closure diverged");
  }
}

}  // namespace snmpc::fp
