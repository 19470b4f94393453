#pragma once

#include <Eigen/Dense>

#include <vector>

#include "snmpc/model.hpp"

namespace snmpc {

struct PolicyInterval {
  double duration;
  Eigen::VectorXd input;
};

/// Piecewise-constant input trajectory starting at t = 0. Queries past the
/// horizon hold the last interval's input.
class ControlPolicy {
 public:
  explicit ControlPolicy(std::vector<PolicyInterval> intervals);

  /// n equal intervals covering `horizon`, all holding `input`.
  static ControlPolicy constant(double horizon, int n, const Eigen::VectorXd& input);
  /// Equal intervals over `horizon`, one per entry of `inputs`.
  static ControlPolicy uniform(double horizon, const std::vector<Eigen::VectorXd>& inputs);

  const Eigen::VectorXd& input_at(double t) const;
  /// Index of the interval active at time t (right-continuous).
  int interval_at(double t) const;

  double horizon() const { return horizon_; }
  int size() const { return static_cast<int>(intervals_.size()); }
  int input_dim() const { return static_cast<int>(intervals_.front().input.size()); }
  const std::vector<PolicyInterval>& intervals() const { return intervals_; }

  /// Same interval layout, each input re-sampled at (interval start + delta)
  /// of this policy. Used to warm-start the next receding-horizon solve.
  ControlPolicy shifted(double delta) const;
  ControlPolicy projected(const model::InputBounds& bounds) const;

  /// Interval-major stacking of the inputs, length size() * input_dim().
  Eigen::VectorXd flatten() const;
  ControlPolicy with_inputs(const Eigen::VectorXd& flat) const;

  bool operator==(const ControlPolicy& other) const;

 private:
  std::vector<PolicyInterval> intervals_;
  std::vector<double> starts_;
  double horizon_ = 0.0;
};

}  // namespace snmpc
