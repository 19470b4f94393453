#pragma once

#include "snmpc/density.hpp"

namespace snmpc::metrics {

/// Overlap sum_i sqrt(p_i q_i) of two densities on the same grid (midpoint
/// quadrature of the Bhattacharyya integral on cell masses). Clamped to
/// [0, 1] against round-off.
double bhattacharyya(const fp::DensityField& p, const fp::DensityField& q);

/// sqrt(1 - bhattacharyya(p, q)).
double hellinger(const fp::DensityField& p, const fp::DensityField& q);

enum class Tail { below, above };

struct TailProbability {
  double probability = 0.0;
  /// Set when the threshold lies outside the grid; the probability is then
  /// exactly 0 or 1.
  bool outside_grid = false;
};

/// Mass below (or above) `threshold`. The cell holding the threshold is split
/// linearly, treating the density as uniform inside the cell.
TailProbability tail_probability(const fp::DensityField& p, double threshold, Tail direction);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance with every cell's mass placed at its center.
Moments moments(const fp::DensityField& p);

struct MetricReport {
  double bhattacharyya = 0.0;
  double hellinger = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Similarity of p to a reference q together with p's moments.
MetricReport compare(const fp::DensityField& p, const fp::DensityField& reference);

}  // namespace snmpc::metrics
