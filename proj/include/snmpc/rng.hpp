#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace snmpc::sde {

/// Source of Wiener increments for one realization.
///
/// The engine is seeded from (seed, stream_id) through a SplitMix64 mix and a
/// std::seed_seq, so distinct stream ids give independent sequences and the
/// same pair always reproduces the same sequence regardless of which thread
/// consumes it.
class WienerStream {
 public:
  WienerStream(std::uint64_t seed, std::uint64_t stream_id, double dt);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  double dt() const { return dt_; }

  /// Fills `out` with i.i.d. N(0, dt) increments.
  void increment(Eigen::Ref<Eigen::VectorXd> out);
  double standard_normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double dt_;
  double sqrt_dt_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace snmpc::sde
