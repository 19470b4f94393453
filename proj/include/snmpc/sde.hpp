#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "snmpc/density.hpp"
#include "snmpc/model.hpp"
#include "snmpc/policy.hpp"
#include "snmpc/rng.hpp"

namespace snmpc::sde {

using model::Vector;

struct PathRecord {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  /// Number of coordinate clamps onto the model's domain box.
  long clip_events = 0;

  std::size_t size() const { return times.size(); }
  /// Index of the record at time t, or -1 when t is not on the record grid.
  long index_of(double t) const;
};

/// Euler-Maruyama stepper x+ = x + (f(x) + g(x) u) dt + h(x) dW, clamping the
/// result onto the domain box and counting every clamped coordinate.
class EulerMaruyama {
 public:
  explicit EulerMaruyama(const model::ControlAffineSde& sys) : sys_(sys), dw_(sys.noise_dim()) {}

  /// Advances x in place by one step of the stream's dt. `t` only labels
  /// divergence errors.
  void step(Vector& x, const Vector& u, WienerStream& stream, double t);
  long clip_events() const { return clip_events_; }

 private:
  const model::ControlAffineSde& sys_;
  Vector dw_;
  long clip_events_ = 0;
};

/// Simulates one path on [0, t_end] with step stream.dt(), recording every
/// `record_every`-th step (the final instant is always recorded). The step
/// must divide t_end and every policy interval length.
PathRecord simulate_path(const model::ControlAffineSde& sys, const Vector& x0,
                         const ControlPolicy& policy, WienerStream& stream, double t_end,
                         int record_every = 1);

/// Draws an initial state from the realization's own stream.
using InitialSampler = std::function<Vector(WienerStream&)>;

struct EnsembleOptions {
  std::uint64_t seed = 0;
  double dt = 0.01;
  double t_end = 1.0;
  int record_every = 1;
};

/// Path i uses WienerStream(seed, i, dt): its initial state is drawn first,
/// then the increments. Paths run in parallel (OpenMP); the result does not
/// depend on the thread count or schedule. Failed paths are reported
/// together in one error naming their realization ids.
std::vector<PathRecord> simulate_ensemble(const model::ControlAffineSde& sys,
                                          const InitialSampler& x0_sampler,
                                          const ControlPolicy& policy, int n_paths,
                                          const EnsembleOptions& options);

/// Serial reference for simulate_ensemble.
std::vector<PathRecord> simulate_ensemble_serial(const model::ControlAffineSde& sys,
                                                 const InitialSampler& x0_sampler,
                                                 const ControlPolicy& policy, int n_paths,
                                                 const EnsembleOptions& options);

/// Histogram of records[*].states[coordinate] at time t on the cells of
/// `grid`, as a unit-mass DensityField. Samples outside the grid fall into the
/// edge cells. Throws ConfigError if t is not on every record's grid.
fp::DensityField empirical_histogram(const std::vector<PathRecord>& records, int coordinate,
                                     double t, const fp::Grid1D& grid);

/// Same, from a plain sample vector.
fp::DensityField empirical_histogram(const std::vector<double>& samples, const fp::Grid1D& grid);

/// CSV with columns time, realization_id, one per state, one per input.
void write_ensemble_csv(std::ostream& out, const std::vector<PathRecord>& records,
                        const std::vector<std::string>& state_names,
                        const std::vector<std::string>& input_names);

}  // namespace snmpc::sde
