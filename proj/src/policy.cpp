#include "snmpc/policy.hpp"

#include <algorithm>

#include "snmpc/error.hpp"

namespace snmpc {

ControlPolicy::ControlPolicy(std::vector<PolicyInterval> intervals)
    : intervals_(std::move(intervals)) {
  if (intervals_.empty()) throw ConfigError("policy: at least one interval required");
  const auto m = intervals_.front().input.size();
  for (const auto& iv : intervals_) {
    if (!(iv.duration > 0.0)) throw ConfigError("policy: interval durations must be positive");
    if (iv.input.size() != m) throw ConfigError("policy: inconsistent input dimensions");
    starts_.push_back(horizon_);
    horizon_ += iv.duration;
  }
}

ControlPolicy ControlPolicy::constant(double horizon, int n, const Eigen::VectorXd& input) {
  return uniform(horizon, std::vector<Eigen::VectorXd>(std::max(n, 1), input));
}

ControlPolicy ControlPolicy::uniform(double horizon,
                                     const std::vector<Eigen::VectorXd>& inputs) {
  if (inputs.empty()) throw ConfigError("policy: at least one interval required");
  std::vector<PolicyInterval> ivs;
  const double d = horizon / static_cast<double>(inputs.size());
  for (const auto& u : inputs) ivs.push_back({d, u});
  return ControlPolicy(std::move(ivs));
}

int ControlPolicy::interval_at(double t) const {
  // Tolerate round-off in accumulated step times at interval boundaries.
  const double eps = 1e-9 * std::max(1.0, horizon_);
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t + eps);
  if (it == starts_.begin()) return 0;
  return static_cast<int>(std::distance(starts_.begin(), it)) - 1;
}

const Eigen::VectorXd& ControlPolicy::input_at(double t) const {
  return intervals_[interval_at(t)].input;
}

ControlPolicy ControlPolicy::shifted(double delta) const {
  std::vector<PolicyInterval> ivs = intervals_;
  for (std::size_t i = 0; i < ivs.size(); ++i) ivs[i].input = input_at(starts_[i] + delta);
  return ControlPolicy(std::move(ivs));
}

ControlPolicy ControlPolicy::projected(const model::InputBounds& bounds) const {
  std::vector<PolicyInterval> ivs = intervals_;
  for (auto& iv : ivs) iv.input = bounds.project(iv.input);
  return ControlPolicy(std::move(ivs));
}

Eigen::VectorXd ControlPolicy::flatten() const {
  const int m = input_dim();
  Eigen::VectorXd flat(size() * m);
  for (int i = 0; i < size(); ++i) flat.segment(i * m, m) = intervals_[i].input;
  return flat;
}

ControlPolicy ControlPolicy::with_inputs(const Eigen::VectorXd& flat) const {
  const int m = input_dim();
  if (flat.size() != size() * m) throw ConfigError("policy: flat input has wrong length");
  std::vector<PolicyInterval> ivs = intervals_;
  for (int i = 0; i < size(); ++i) ivs[i].input = flat.segment(i * m, m);
  return ControlPolicy(std::move(ivs));
}

bool ControlPolicy::operator==(const ControlPolicy& other) const {
  if (size() != other.size()) return false;
  for (int i = 0; i < size(); ++i) {
    if (intervals_[i].duration != other.intervals_[i].duration) return false;
    if (intervals_[i].input != other.intervals_[i].input) return false;
  }
  return true;
}

}  // namespace snmpc
