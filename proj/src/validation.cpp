#include "snmpc/validation.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "snmpc/error.hpp"
#include "snmpc/fokker_planck.hpp"
#include "snmpc/lyapunov.hpp"
#include "snmpc/metrics.hpp"
#include "snmpc/model.hpp"
#include "snmpc/sde.hpp"

namespace snmpc::validation {

namespace {

CheckResult check(std::string suite, std::string name, double value, double limit,
                  bool passed, std::string detail = {}) {
  return {std::move(suite), std::move(name), passed, value, limit, std::move(detail)};
}

double propagate_hellinger(const fp::DensityField& initial, fp::AdvectionProfile& profile,
                           double diffusion, double t_end, double dt_max,
                           const fp::DensityField& exact) {
  const std::vector<double> at{t_end};
  const auto traj = fp::fp_propagate(initial, profile, diffusion, 0.0, t_end, dt_max, at);
  return metrics::hellinger(traj.snapshots.back(), exact);
}

}  // namespace

double heat_kernel_hellinger(int n_cells) {
  const fp::Grid1D grid(0.0, 2.0, n_cells);
  const double D = 0.001, s0 = 0.05, t = 10.0;
  const auto initial = fp::density_from_normal(1.0, s0 * s0, grid).field;
  const auto exact = fp::density_from_normal(1.0, s0 * s0 + 2.0 * D * t, grid).field;
  fp::FunctionAdvection none([](double, double) { return 0.0; });
  return propagate_hellinger(initial, none, D, t, 0.01, exact);
}

double ou_stationary_hellinger(double theta, double sigma, int n_cells, double t_end) {
  const fp::Grid1D grid(-2.5, 2.5, n_cells);
  const double var = sigma * sigma / (2.0 * theta);
  const auto stationary = fp::density_from_normal(0.0, var, grid).field;
  fp::FunctionAdvection drift([theta](double, double x) { return -theta * x; });
  return propagate_hellinger(stationary, drift, 0.5 * sigma * sigma, t_end, 0.01, stationary);
}

std::vector<CheckResult> fp_suite() {
  std::vector<CheckResult> out;
  const double h50 = heat_kernel_hellinger(50);
  const double h100 = heat_kernel_hellinger(100);
  const double h200 = heat_kernel_hellinger(200);
  std::ostringstream d;
  d << "50: " << h50 << ", 100: " << h100 << ", 200: " << h200;
  out.push_back(check("fp", "heat kernel hellinger at 200 cells", h200, 0.05, h200 <= 0.05, d.str()));
  out.push_back(check("fp", "heat kernel monotone refinement", h200, h50,
                      h50 > h100 && h100 > h200, d.str()));
  const double o50 = ou_stationary_hellinger(1.0, 0.5, 50, 5.0);
  const double o100 = ou_stationary_hellinger(1.0, 0.5, 100, 5.0);
  const double o200 = ou_stationary_hellinger(1.0, 0.5, 200, 5.0);
  std::ostringstream o;
  o << "50: " << o50 << ", 100: " << o100 << ", 200: " << o200;
  out.push_back(check("fp", "OU stationary hellinger at 200 cells", o200, 0.05, o200 <= 0.05, o.str()));
  out.push_back(check("fp", "OU monotone refinement", o200, o50, o50 > o100 && o100 > o200, o.str()));
  return out;
}

std::vector<CheckResult> metric_suite() {
  std::vector<CheckResult> out;
  const fp::Grid1D grid(-1.5, 2.5, 4000);
  const double pairs[5][2] = {{0.0, 0.1}, {0.05, 0.1}, {0.1, 0.1}, {0.2, 0.15}, {0.3, 0.2}};
  double worst = 0.0;
  for (const auto& pr : pairs) {
    const double dmu = pr[0], s = pr[1];
    const auto p = fp::density_from_normal(0.5, s * s, grid).field;
    const auto q = fp::density_from_normal(0.5 + dmu, s * s, grid).field;
    const double exact = std::exp(-dmu * dmu / (8.0 * s * s));
    worst = std::max(worst, std::abs(metrics::bhattacharyya(p, q) - exact));
  }
  out.push_back(check("metrics", "gaussian bhattacharyya closed form", worst, 1e-3, worst <= 1e-3));

  const fp::Grid1D coarse(0.0, 2.0, 200);
  const auto p = fp::density_from_normal(0.57, 4e-4, coarse).field;
  const double self = std::abs(metrics::bhattacharyya(p, p) - 1.0);
  out.push_back(check("metrics", "identity coefficient", self, 1e-12, self <= 1e-12));
  std::vector<double> a(200, 0.0), b(200, 0.0);
  for (int i = 0; i < 100; ++i) a[i] = 0.01;
  for (int i = 100; i < 200; ++i) b[i] = 0.01;
  const double disjoint = metrics::bhattacharyya(fp::DensityField::from_weights(coarse, a),
                                                 fp::DensityField::from_weights(coarse, b));
  out.push_back(check("metrics", "disjoint coefficient", disjoint, 1e-12, disjoint <= 1e-12));
  return out;
}

std::vector<CheckResult> lyapunov_suite(const Options& options) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    model::Matrix A(2, 2);
    A << unif(rng), unif(rng), unif(rng), unif(rng);
    const double shift = A.eigenvalues().real().maxCoeff();
    A -= (shift + 0.1 + 0.5 * (unif(rng) + 2.0)) * model::Matrix::Identity(2, 2);
    model::Matrix M(2, 2);
    M << unif(rng), unif(rng), unif(rng), unif(rng);
    const model::Matrix Q = M * M.transpose() + 0.1 * model::Matrix::Identity(2, 2);
    const model::Matrix P = lyap::solve_lyapunov(A, Q);
    const double rel = (A.transpose() * P + P * A + Q).norm() / Q.norm();
    worst = std::max(worst, rel);
  }
  out.push_back(check("lyapunov", "random stable 2x2 residual", worst, 1e-10, worst <= 1e-10));

  model::Matrix P(2, 2);
  P << 3.18, 0.93, 0.93, 0.58;
  if (options.inject_asymmetric_P) P(0, 1) += 0.05;
  try {
    const lyap::LyapunovCertificate cert(P, 0.1, Eigen::Vector2d(0.57, 317.0));
    out.push_back(check("lyapunov", "benchmark certificate invariants", 0.0, 0.0, true));
  } catch (const CertificateError& e) {
    out.push_back(check("lyapunov", "benchmark certificate invariants", 1.0, 0.0, false, e.what()));
  }

  const auto sys = model::build_cstr(model::CstrParameters{});
  const Eigen::Vector2d x_ss(0.57, 317.0);
  const auto ss = model::solve_steady_inputs(sys, x_ss, Eigen::Vector2d(0.57, 0.0));
  const auto lin = model::linearize(sys, x_ss, ss.u);
  const model::Matrix regenerated = lyap::solve_lyapunov(lin.A, model::Matrix::Identity(2, 2));
  const double gap = (regenerated - P).cwiseAbs().maxCoeff();
  std::ostringstream d;
  d << "regenerated P = [[" << regenerated(0, 0) << ", " << regenerated(0, 1) << "], ["
    << regenerated(1, 0) << ", " << regenerated(1, 1) << "]]";
  out.push_back(check("lyapunov", "benchmark P from linearization with Q = I", gap, 0.03,
                      gap <= 0.03, d.str()));
  return out;
}

std::vector<CheckResult> generator_suite(const Options& options) {
  const double theta = 1.0, sigma = 0.5, x0 = 0.5, dt = 0.01;
  const int n = 10000;
  const auto sys = model::build_ou(theta, sigma, 10.0);
  const lyap::LyapunovCertificate cert(model::Matrix::Identity(1, 1), 1.0, model::Vector::Zero(1));
  const model::Vector x = model::Vector::Constant(1, x0);
  const model::Vector u = model::Vector::Zero(1);
  const double exact = lyap::generator(cert, sys, x, u);

  const ControlPolicy hold = ControlPolicy::constant(dt, 1, u);
  sde::EnsembleOptions opt;
  opt.seed = options.seed;
  opt.dt = dt;
  opt.t_end = dt;
  const auto paths = sde::simulate_ensemble(sys, [&](sde::WienerStream&) { return x; }, hold, n, opt);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& p : paths) {
    const double v = (lyap::lyapunov_value(cert, p.states.back()) - lyap::lyapunov_value(cert, x)) / dt;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
  const double z = std::abs(mean - exact) / se;
  std::ostringstream d;
  d << "generator " << exact << ", estimate " << mean << " +- " << se;
  return {check("generator", "OU generator vs Euler-Maruyama", z, 3.0, z <= 3.0, d.str())};
}

std::vector<CheckResult> run_all(const Options& options) {
  std::vector<CheckResult> out;
  for (auto suite : {fp_suite(), metric_suite(), lyapunov_suite(options), generator_suite(options)}) {
    out.insert(out.end(), suite.begin(), suite.end());
  }
  return out;
}

}  // namespace snmpc::validation
