#include "snmpc/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "snmpc/error.hpp"

namespace snmpc::fp {

Grid1D::Grid1D(double lower, double upper, int n_cells)
    : lower_(lower), upper_(upper), n_cells_(n_cells), dx_((upper - lower) / n_cells) {
  if (!(lower < upper)) throw ConfigError("grid: lower must be below upper");
  if (n_cells < 2) throw ConfigError("grid: at least two cells required");
}

std::vector<double> Grid1D::centers() const {
  std::vector<double> c(n_cells_);
  for (int i = 0; i < n_cells_; ++i) c[i] = center(i);
  return c;
}

std::vector<double> Grid1D::faces() const {
  std::vector<double> f(n_cells_ + 1);
  for (int j = 0; j <= n_cells_; ++j) f[j] = face(j);
  return f;
}

int Grid1D::locate(double x) const {
  const auto i = static_cast<long>(std::floor((x - lower_) / dx_));
  return static_cast<int>(std::clamp<long>(i, 0, n_cells_ - 1));
}

DensityField DensityField::from_masses(const Grid1D& grid, std::vector<double> masses) {
  if (static_cast<int>(masses.size()) != grid.n_cells()) {
    throw ConfigError("density: mass vector length does not match grid");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] >= 0.0) || !std::isfinite(masses[i])) {
      std::ostringstream msg;
      msg << "density: mass in cell " << i << " is negative or not finite";
      throw ConfigError(msg.str());
    }
    total += masses[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "density: total mass " << total << " differs from 1";
    throw ConfigError(msg.str());
  }
  return DensityField(grid, std::move(masses));
}

DensityField DensityField::from_weights(const Grid1D& grid, std::vector<double> weights) {
  if (static_cast<int>(weights.size()) != grid.n_cells()) {
    throw ConfigError("density: weight vector length does not match grid");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("density: weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("density: weights carry no mass");
  for (double& w : weights) w /= total;
  return DensityField(grid, std::move(weights));
}

double DensityField::total_mass() const {
  return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

}  // namespace snmpc::fp
