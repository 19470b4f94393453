#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace snmpc::validation {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct Options {
  std::uint64_t seed = 1;
  /// Replaces the benchmark P by a non-symmetric perturbation before the
  /// certificate checks (negative test of the invariant).
  bool inject_asymmetric_P = false;
};

/// Hellinger distance between the propagated and the analytic heat kernel
/// (D = 0.001, N(1, 0.05^2) on [0, 2], t = 10) at n_cells.
double heat_kernel_hellinger(int n_cells);

/// Hellinger distance after propagating the OU stationary density
/// N(0, sigma^2 / (2 theta)) for `t_end` on [-2.5, 2.5] with n_cells.
double ou_stationary_hellinger(double theta, double sigma, int n_cells, double t_end);

std::vector<CheckResult> fp_suite();
std::vector<CheckResult> metric_suite();
std::vector<CheckResult> lyapunov_suite(const Options& options);
std::vector<CheckResult> generator_suite(const Options& options);

std::vector<CheckResult> run_all(const Options& options);

}  // namespace snmpc::validation
