#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace snmpc::model {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box, used both as the model's domain and as input bounds.
struct Box {
  Vector lower;
  Vector upper;

  int size() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& x) const;
  /// Componentwise projection onto the box.
  Vector clamp(const Vector& x) const;
};

/// Input box u_min <= u <= u_max. Construction rejects empty boxes.
class InputBounds {
 public:
  InputBounds(Vector lower, Vector upper);

  const Vector& lower() const { return box_.lower; }
  const Vector& upper() const { return box_.upper; }
  int size() const { return box_.size(); }
  bool contains(const Vector& u) const { return box_.contains(u); }
  Vector project(const Vector& u) const { return box_.clamp(u); }

 private:
  Box box_;
};

/// Control-affine Ito SDE
///
///   dx = (f(x) + g(x) u) dt + h(x) dw
///
/// with an n-dimensional state, m inputs and a q-dimensional Wiener process.
/// Instances are immutable; the callables must be pure.
class ControlAffineSde {
 public:
  using DriftFn = std::function<Vector(const Vector&)>;
  using MatrixFn = std::function<Matrix(const Vector&)>;

  ControlAffineSde(int state_dim, int input_dim, int noise_dim, DriftFn drift_f,
                   MatrixFn input_map_g, MatrixFn diffusion_h, Box domain,
                   std::vector<std::string> state_names = {});

  int state_dim() const { return state_dim_; }
  int input_dim() const { return input_dim_; }
  int noise_dim() const { return noise_dim_; }
  const Box& domain() const { return domain_; }
  const std::string& state_name(int i) const { return state_names_[i]; }

  const DriftFn& drift_f() const { return drift_f_; }
  const MatrixFn& input_map_g() const { return input_map_g_; }
  const MatrixFn& diffusion_h() const { return diffusion_h_; }

 private:
  int state_dim_;
  int input_dim_;
  int noise_dim_;
  DriftFn drift_f_;
  MatrixFn input_map_g_;
  MatrixFn diffusion_h_;
  Box domain_;
  std::vector<std::string> state_names_;
};

/// Univariate chance constraint Pr{violation} <= 1 - confidence, where a
/// violation is x[coordinate] <= threshold (or >= for `violated_above`).
/// The residual form k(x) <= 0 is exposed through threshold_fn().
struct StateConstraint {
  int coordinate = 0;
  double threshold = 0.0;
  bool violated_above = false;
  double confidence = 0.95;

  void validate() const;
  double max_violation_probability() const { return 1.0 - confidence; }
  /// k(x); the constraint holds at x iff k(x) <= 0.
  Vector threshold_fn(const Vector& x) const;
};

/// CSTR parameters. Defaults are the benchmark values.
struct CstrParameters {
  double V = 0.1;        // m^3
  double F = 0.1;        // m^3/min
  double T0 = 315.0;     // K
  double E = 8.314e4;    // kJ/kmol
  double R = 8.314;      // kJ/(kmol K)
  double dH = 4.78e5;    // kJ/kmol
  double k0 = 72e9;      // 1/min
  double cp = 0.239;     // kJ/(kg K)
  double rho = 1000.0;   // kg/m^3
  double sigma_CA = 0.32;

  void validate() const;
  double arrhenius(double T) const { return k0 * std::exp(-E / (R * T)); }
  double residence_rate() const { return F / V; }
  double heating_coefficient() const { return dH / (rho * cp); }
  double heat_input_coefficient() const { return 1.0 / (rho * cp * V); }
};

/// Beta distribution rescaled to [lower, upper].
class Beta4Distribution {
 public:
  Beta4Distribution(double lower, double upper, double alpha, double beta);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  double cdf(double x) const;
  double pdf(double x) const;
  double mean() const;
  double variance() const;
  double sample(std::mt19937_64& engine) const;

 private:
  double lower_, upper_, alpha_, beta_;
};

/// f(x) + g(x) u. Throws ModelDomainError naming the first non-finite
/// coordinate.
Vector eval_drift(const ControlAffineSde& sys, const Vector& x, const Vector& u);

/// h(x), an n x q matrix.
Matrix eval_diffusion(const ControlAffineSde& sys, const Vector& x);

struct Linearization {
  Matrix A;
  Matrix B;
};

/// Central-difference state Jacobian of eval_drift at (x_ss, u_ss) and the
/// input Jacobian B = g(x_ss), exact for the control-affine drift. A step <= 0
/// selects the per-coordinate default 1e-6 * (1 + |coordinate|).
Linearization linearize(const ControlAffineSde& sys, const Vector& x_ss,
                        const Vector& u_ss, double step = 0.0);

/// Two-state CSTR with states (C_A, T), inputs (C_A0, Q) and one Wiener
/// process acting on C_A. Domain C_A in [0, 2], T in [250, 400].
ControlAffineSde build_cstr(const CstrParameters& params);

/// Scalar Ornstein-Uhlenbeck test system dx = (-theta x + u) dt + sigma dw on
/// [-half_width, half_width].
ControlAffineSde build_ou(double theta, double sigma, double half_width);

struct SteadyStateInputs {
  Vector u;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Inputs that make x_ss an equilibrium of the drift, by damped Newton on
/// eval_drift(x_ss, u) = 0 starting from u_guess.
SteadyStateInputs solve_steady_inputs(const ControlAffineSde& sys,
                                      const Vector& x_ss, const Vector& u_guess,
                                      int max_iterations = 50,
                                      double tolerance = 1e-12);

}  // namespace snmpc::model
