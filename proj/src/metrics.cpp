#include "snmpc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "snmpc/error.hpp"

namespace snmpc::metrics {

double bhattacharyya(const fp::DensityField& p, const fp::DensityField& q) {
  if (!(p.grid() == q.grid())) throw MetricError("bhattacharyya: densities live on different grids");
  const auto& a = p.masses();
  const auto& b = q.masses();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::sqrt(a[i] * b[i]);
  return std::clamp(sum, 0.0, 1.0);
}

double hellinger(const fp::DensityField& p, const fp::DensityField& q) {
  return std::sqrt(1.0 - bhattacharyya(p, q));
}

TailProbability tail_probability(const fp::DensityField& p, double threshold, Tail direction) {
  const fp::Grid1D& grid = p.grid();
  if (threshold <= grid.lower()) {
    return {direction == Tail::below ? 0.0 : 1.0, threshold < grid.lower()};
  }
  if (threshold >= grid.upper()) {
    return {direction == Tail::below ? 1.0 : 0.0, threshold > grid.upper()};
  }
  const int cell = grid.locate(threshold);
  double below = 0.0;
  for (int i = 0; i < cell; ++i) below += p.mass(i);
  const double fraction = (threshold - grid.face(cell)) / grid.dx();
  below += fraction * p.mass(cell);
  double above = 0.0;
  for (int i = cell + 1; i < grid.n_cells(); ++i) above += p.mass(i);
  above += (1.0 - fraction) * p.mass(cell);
  return {direction == Tail::below ? below : above, false};
}

Moments moments(const fp::DensityField& p) {
  const fp::Grid1D& grid = p.grid();
  double mean = 0.0;
  for (int i = 0; i < grid.n_cells(); ++i) mean += p.mass(i) * grid.center(i);
  double var = 0.0;
  for (int i = 0; i < grid.n_cells(); ++i) {
    const double d = grid.center(i) - mean;
    var += p.mass(i) * d * d;
  }
  return {mean, var};
}

MetricReport compare(const fp::DensityField& p, const fp::DensityField& reference) {
  const double bc = bhattacharyya(p, reference);
  const Moments m = moments(p);
  return {bc, std::sqrt(1.0 - bc), m.mean, m.variance};
}

}  // namespace snmpc::metrics
