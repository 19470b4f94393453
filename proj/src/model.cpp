#include "snmpc/model.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <sstream>

#include "snmpc/error.hpp"

namespace snmpc::model {

bool Box::contains(const Vector& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

Vector Box::clamp(const Vector& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

InputBounds::InputBounds(Vector lower, Vector upper)
    : box_{std::move(lower), std::move(upper)} {
  if (box_.lower.size() != box_.upper.size() || box_.lower.size() == 0) {
    throw ConfigError("input bounds: lower and upper must have equal, nonzero size");
  }
  for (int i = 0; i < box_.size(); ++i) {
    if (!(box_.lower[i] <= box_.upper[i])) {
      std::ostringstream msg;
      msg << "input bounds: lower[" << i << "] = " << box_.lower[i]
          << " exceeds upper[" << i << "] = " << box_.upper[i];
      throw ConfigError(msg.str());
    }
  }
}

ControlAffineSde::ControlAffineSde(int state_dim, int input_dim, int noise_dim,
                                   DriftFn drift_f, MatrixFn input_map_g,
                                   MatrixFn diffusion_h, Box domain,
                                   std::vector<std::string> state_names)
    : state_dim_(state_dim),
      input_dim_(input_dim),
      noise_dim_(noise_dim),
      drift_f_(std::move(drift_f)),
      input_map_g_(std::move(input_map_g)),
      diffusion_h_(std::move(diffusion_h)),
      domain_(std::move(domain)),
      state_names_(std::move(state_names)) {
  if (state_dim_ < 1 || input_dim_ < 0 || noise_dim_ < 0) {
    throw ConfigError("sde: dimensions must satisfy n >= 1, m >= 0, q >= 0");
  }
  if (!drift_f_ || !input_map_g_ || !diffusion_h_) {
    throw ConfigError("sde: drift, input map and diffusion must all be set");
  }
  if (domain_.size() != state_dim_) {
    throw ConfigError("sde: domain box dimension does not match state_dim");
  }
  if (state_names_.empty()) {
    for (int i = 0; i < state_dim_; ++i) state_names_.push_back("x" + std::to_string(i));
  }
  if (static_cast<int>(state_names_.size()) != state_dim_) {
    throw ConfigError("sde: one name per state coordinate required");
  }
}

void StateConstraint::validate() const {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ConfigError("state constraint: confidence must lie in (0, 1)");
  }
  if (coordinate < 0) throw ConfigError("state constraint: negative coordinate");
}

Vector StateConstraint::threshold_fn(const Vector& x) const {
  Vector k(1);
  k[0] = violated_above ? x[coordinate] - threshold : threshold - x[coordinate];
  return k;
}

void CstrParameters::validate() const {
  const std::pair<const char*, double> positive[] = {
      {"V", V},   {"F", F},   {"T0", T0}, {"E", E},     {"R", R},
      {"dH", dH}, {"k0", k0}, {"cp", cp}, {"rho", rho},
  };
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ConfigError(std::string("cstr parameters: ") + name + " must be positive");
    }
  }
  // sigma_CA = 0 is allowed so the noise-free plant can be simulated.
  if (!(sigma_CA >= 0.0) || !std::isfinite(sigma_CA)) {
    throw ConfigError("cstr parameters: sigma_CA must be non-negative");
  }
}

Beta4Distribution::Beta4Distribution(double lower, double upper, double alpha,
                                     double beta)
    : lower_(lower), upper_(upper), alpha_(alpha), beta_(beta) {
  if (!(lower_ < upper_)) throw ConfigError("beta distribution: lower must be below upper");
  if (!(alpha_ > 0.0) || !(beta_ > 0.0)) {
    throw ConfigError("beta distribution: shape parameters must be positive");
  }
}

double Beta4Distribution::cdf(double x) const {
  if (x <= lower_) return 0.0;
  if (x >= upper_) return 1.0;
  return boost::math::ibeta(alpha_, beta_, (x - lower_) / (upper_ - lower_));
}

double Beta4Distribution::pdf(double x) const {
  if (x < lower_ || x > upper_) return 0.0;
  const double width = upper_ - lower_;
  return boost::math::ibeta_derivative(alpha_, beta_, (x - lower_) / width) / width;
}

double Beta4Distribution::mean() const {
  return lower_ + (upper_ - lower_) * alpha_ / (alpha_ + beta_);
}

double Beta4Distribution::variance() const {
  const double s = alpha_ + beta_;
  const double width = upper_ - lower_;
  return width * width * alpha_ * beta_ / (s * s * (s + 1.0));
}

double Beta4Distribution::sample(std::mt19937_64& engine) const {
  std::gamma_distribution<double> ga(alpha_, 1.0);
  std::gamma_distribution<double> gb(beta_, 1.0);
  const double a = ga(engine);
  const double b = gb(engine);
  return lower_ + (upper_ - lower_) * a / (a + b);
}

namespace {

void require_finite(const ControlAffineSde& sys, const Vector& value,
                    const char* what) {
  for (int i = 0; i < value.size(); ++i) {
    if (!std::isfinite(value[i])) {
      std::ostringstream msg;
      msg << what << " is not finite in coordinate "
          << (value.size() == sys.state_dim() ? sys.state_name(i) : std::to_string(i));
      throw ModelDomainError(msg.str());
    }
  }
}

}  // namespace

Vector eval_drift(const ControlAffineSde& sys, const Vector& x, const Vector& u) {
  if (x.size() != sys.state_dim() || u.size() != sys.input_dim()) {
    throw ConfigError("eval_drift: state or input dimension mismatch");
  }
  Vector rate = sys.drift_f()(x);
  if (sys.input_dim() > 0) rate.noalias() += sys.input_map_g()(x) * u;
  require_finite(sys, rate, "drift");
  return rate;
}

Matrix eval_diffusion(const ControlAffineSde& sys, const Vector& x) {
  if (x.size() != sys.state_dim()) {
    throw ConfigError("eval_diffusion: state dimension mismatch");
  }
  Matrix h = sys.diffusion_h()(x);
  if (h.rows() != sys.state_dim() || h.cols() != sys.noise_dim()) {
    throw ConfigError("eval_diffusion: diffusion matrix has wrong shape");
  }
  for (int i = 0; i < h.rows(); ++i) {
    for (int j = 0; j < h.cols(); ++j) {
      if (!std::isfinite(h(i, j))) {
        throw ModelDomainError("diffusion is not finite in row " + sys.state_name(i));
      }
    }
  }
  return h;
}

Linearization linearize(const ControlAffineSde& sys, const Vector& x_ss,
                        const Vector& u_ss, double step) {
  const int n = sys.state_dim();
  const int m = sys.input_dim();
  Linearization lin{Matrix(n, n), Matrix(n, m)};

  auto column = [&](auto perturb, double h) -> Vector {
    if (!(h > 0.0)) throw LinearizationError("linearize: non-positive step");
    Vector plus = perturb(h);
    Vector minus = perturb(-h);
    Vector diff = (plus - minus) / (2.0 * h);
    if (!diff.allFinite()) throw LinearizationError("linearize: non-finite difference");
    return diff;
  };

  for (int j = 0; j < n; ++j) {
    const double h = step > 0.0 ? step : 1e-6 * (1.0 + std::abs(x_ss[j]));
    if (x_ss[j] + h == x_ss[j]) throw LinearizationError("linearize: step underflow in x");
    lin.A.col(j) = column(
        [&](double d) {
          Vector x = x_ss;
          x[j] += d;
          return eval_drift(sys, x, u_ss);
        },
        h);
  }
  if (u_ss.size() != m) throw ConfigError("linearize: input dimension mismatch");
  lin.B = sys.input_map_g()(x_ss);
  if (lin.B.rows() != n || lin.B.cols() != m || !lin.B.allFinite()) {
    throw LinearizationError("linearize: input map is malformed or not finite");
  }
  return lin;
}

ControlAffineSde build_cstr(const CstrParameters& p) {
  p.validate();
  auto drift = [p](const Vector& x) {
    const double ca = x[0];
    const double temp = x[1];
    const double rate = p.arrhenius(temp) * ca;
    Vector f(2);
    f[0] = -p.residence_rate() * ca - rate;
    f[1] = p.residence_rate() * (p.T0 - temp) + p.heating_coefficient() * rate;
    return f;
  };
  auto input_map = [p](const Vector&) {
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = p.residence_rate();
    g(1, 1) = p.heat_input_coefficient();
    return g;
  };
  auto diffusion = [p](const Vector&) {
    Matrix h = Matrix::Zero(2, 1);
    h(0, 0) = p.sigma_CA;
    return h;
  };
  Box domain{Eigen::Vector2d(0.0, 250.0), Eigen::Vector2d(2.0, 400.0)};
  return ControlAffineSde(2, 2, 1, drift, input_map, diffusion, domain, {"C_A", "T"});
}

ControlAffineSde build_ou(double theta, double sigma, double half_width) {
  if (!(theta >= 0.0) || !(sigma >= 0.0) || !(half_width > 0.0)) {
    throw ConfigError("ou: theta, sigma must be >= 0 and half_width > 0");
  }
  auto drift = [theta](const Vector& x) { return Vector::Constant(1, -theta * x[0]); };
  auto input_map = [](const Vector&) { return Matrix::Identity(1, 1); };
  auto diffusion = [sigma](const Vector&) { return Matrix::Constant(1, 1, sigma); };
  Box domain{Vector::Constant(1, -half_width), Vector::Constant(1, half_width)};
  return ControlAffineSde(1, 1, 1, drift, input_map, diffusion, domain, {"x"});
}

SteadyStateInputs solve_steady_inputs(const ControlAffineSde& sys,
                                      const Vector& x_ss, const Vector& u_guess,
                                      int max_iterations, double tolerance) {
  SteadyStateInputs out{u_guess, 0.0, 0};
  Vector residual = eval_drift(sys, x_ss, out.u);
  out.residual_norm = residual.norm();
  while (out.iterations < max_iterations && out.residual_norm > tolerance) {
    const Matrix B = linearize(sys, x_ss, out.u).B;
    const Vector delta = B.completeOrthogonalDecomposition().solve(-residual);
    double damping = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, damping *= 0.5) {
      const Vector trial = out.u + damping * delta;
      const Vector trial_residual = eval_drift(sys, x_ss, trial);
      if (trial_residual.norm() < out.residual_norm) {
        out.u = trial;
        residual = trial_residual;
        out.residual_norm = trial_residual.norm();
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) break;
  }
  return out;
}

}  // namespace snmpc::model
