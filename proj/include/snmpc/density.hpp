#pragma once

#include <span>
#include <vector>

namespace snmpc::fp {

/// Uniform finite-volume grid on [lower, upper].
class Grid1D {
 public:
  Grid1D(double lower, double upper, int n_cells);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  int n_cells() const { return n_cells_; }
  double dx() const { return dx_; }
  double center(int i) const { return lower_ + (i + 0.5) * dx_; }
  /// Face j sits at lower + j dx, j = 0..n_cells.
  double face(int j) const { return lower_ + j * dx_; }
  std::vector<double> centers() const;
  std::vector<double> faces() const;
  /// Index of the cell containing x, clamped to [0, n_cells - 1].
  int locate(double x) const;

  bool operator==(const Grid1D& other) const = default;

 private:
  double lower_;
  double upper_;
  int n_cells_;
  double dx_;
};

/// Cell masses of a univariate probability density. Masses are non-negative
/// and sum to one within 1e-9.
class DensityField {
 public:
  /// Validates the masses as given.
  static DensityField from_masses(const Grid1D& grid, std::vector<double> masses);
  /// Normalizes non-negative weights to unit mass.
  static DensityField from_weights(const Grid1D& grid, std::vector<double> weights);

  const Grid1D& grid() const { return grid_; }
  const std::vector<double>& masses() const { return masses_; }
  double mass(int i) const { return masses_[i]; }
  /// Cell-averaged density mass / dx.
  double density(int i) const { return masses_[i] / grid_.dx(); }
  double total_mass() const;

  bool operator==(const DensityField& other) const = default;

 private:
  DensityField(const Grid1D& grid, std::vector<double> masses)
      : grid_(grid), masses_(std::move(masses)) {}

  Grid1D grid_;
  std::vector<double> masses_;
};

}  // namespace snmpc::fp
