#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "snmpc/error.hpp"
#include "snmpc/lyapunov.hpp"

using namespace snmpc;
using model::Matrix;
using model::Vector;

namespace {

Matrix benchmark_P() {
  Matrix P(2, 2);
  P << 3.18, 0.93, 0.93, 0.58;
  return P;
}

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

model::ControlAffineSde scalar(double a, double sigma) {
  return model::ControlAffineSde(
      1, 1, 1, [a](const Vector& x) { return Vector(a * x); },
      [](const Vector&) { return Matrix::Identity(1, 1); },
      [sigma](const Vector&) { return Matrix::Constant(1, 1, sigma); },
      model::Box{Vector::Constant(1, -10.0), Vector::Constant(1, 10.0)});
}

model::ControlAffineSde linear(const Matrix& A, const Matrix& h) {
  return model::ControlAffineSde(
      2, 1, static_cast<int>(h.cols()), [A](const Vector& x) { return Vector(A * x); },
      [](const Vector&) { return Matrix::Zero(2, 1); }, [h](const Vector&) { return h; },
      model::Box{Vector::Constant(2, -10.0), Vector::Constant(2, 10.0)});
}

lyap::LyapunovCertificate unit(double gamma) {
  return lyap::LyapunovCertificate(Matrix::Identity(1, 1), gamma, Vector::Zero(1));
}

}  // namespace

TEST(Certificate, Values) {
  const lyap::LyapunovCertificate cert(benchmark_P(), 0.1, v2(0.57, 317.0));
  EXPECT_EQ(lyap::lyapunov_value(cert, v2(0.57, 317.0)), 0.0);
  EXPECT_NEAR(lyap::lyapunov_value(cert, v2(1.57, 317.0)), 3.18, 1e-12);
  EXPECT_NEAR(lyap::lyapunov_value(cert, v2(1.57, 318.0)), 5.62, 1e-12);
}

TEST(Certificate, RejectsInvalid) {
  Matrix bad = benchmark_P();
  bad(0, 1) += 0.05;
  EXPECT_THROW(lyap::LyapunovCertificate(bad, 0.1, v2(0, 0)), CertificateError);
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(lyap::LyapunovCertificate(indefinite, 0.1, v2(0, 0)), CertificateError);
  EXPECT_THROW(lyap::LyapunovCertificate(benchmark_P(), 0.0, v2(0, 0)), CertificateError);
}

TEST(Generator, ZeroAtCenterWithoutNoise) {
  const auto sys = model::build_cstr([] {
    model::CstrParameters p;
    p.sigma_CA = 0.0;
    return p;
  }());
  const lyap::LyapunovCertificate cert(benchmark_P(), 0.1, v2(0.57, 317.0));
  EXPECT_NEAR(lyap::generator(cert, sys, v2(0.57, 317.0), v2(0.9, -4.0)), 0.0, 1e-12);
  EXPECT_NEAR(lyap::stability_residual(cert, sys, v2(0.57, 317.0), v2(0.9, -4.0)), 0.0, 1e-12);
}

TEST(Generator, ScalarOu) {
  const double sigma = 0.4;
  const auto sys = scalar(-1.0, sigma);
  for (double x : {-1.3, 0.0, 0.5, 2.0}) {
    const Vector xv = Vector::Constant(1, x);
    EXPECT_NEAR(lyap::generator(unit(1.0), sys, xv, Vector::Zero(1)), -2 * x * x + sigma * sigma, 1e-12);
    EXPECT_NEAR(lyap::diffusion_term(unit(1.0), sys, xv), sigma * sigma, 1e-15);
  }
}

TEST(Generator, LinearSystemMatrixForm) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Matrix A(2, 2), h(2, 2), M(2, 2);
    A << u(rng), u(rng), u(rng), u(rng);
    h << u(rng), u(rng), u(rng), u(rng);
    M << u(rng), u(rng), u(rng), u(rng);
    const Matrix P = M * M.transpose() + Matrix::Identity(2, 2);
    const lyap::LyapunovCertificate cert(P, 0.5, Vector::Zero(2));
    const Vector x = v2(u(rng), u(rng));
    const double exact = x.dot((A.transpose() * P + P * A) * x) + (h.transpose() * P * h).trace();
    EXPECT_NEAR(lyap::generator(cert, linear(A, h), x, Vector::Zero(1)), exact, 1e-12);
  }
}

TEST(StabilityResidual, ScalarCases) {
  for (double x : {-2.0, -0.1, 0.7}) {
    const Vector xv = Vector::Constant(1, x);
    EXPECT_NEAR(lyap::stability_residual(unit(1.0), scalar(-1.0, 0.0), xv, Vector::Zero(1)), -x * x, 1e-12);
    EXPECT_NEAR(lyap::stability_residual(unit(1.0), scalar(1.0, 0.0), xv, Vector::Zero(1)), 3 * x * x, 1e-12);
  }
}

TEST(StabilityResidual, InputEntersLinearly) {
  const auto sys = model::build_cstr({});
  const lyap::LyapunovCertificate cert(benchmark_P(), 0.1, v2(0.57, 317.0));
  const Vector x = v2(0.8, 318.0);
  const double r0 = lyap::stability_residual(cert, sys, x, v2(0.0, 0.0));
  const double r1 = lyap::stability_residual(cert, sys, x, v2(1.0, 0.0));
  const double r2 = lyap::stability_residual(cert, sys, x, v2(2.0, 0.0));
  EXPECT_NEAR(r2 - r1, r1 - r0, 1e-9);
}

TEST(SolveLyapunov, ClosedForms) {
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_LT((lyap::solve_lyapunov(-I, 2 * I) - I).norm(), 1e-14);
  Matrix A = Matrix::Zero(2, 2);
  A.diagonal() << -1.0, -2.0;
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal() << 0.5, 0.25;
  EXPECT_LT((lyap::solve_lyapunov(A, I) - expected).norm(), 1e-14);
}

TEST(SolveLyapunov, RandomStableResidual) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    Matrix A(2, 2), M(2, 2);
    A << u(rng), u(rng), u(rng), u(rng);
    A -= (A.eigenvalues().real().maxCoeff() + 0.05) * Matrix::Identity(2, 2);
    M << u(rng), u(rng), u(rng), u(rng);
    const Matrix Q = M * M.transpose() + 0.01 * Matrix::Identity(2, 2);
    const Matrix P = lyap::solve_lyapunov(A, Q);
    EXPECT_LE((A.transpose() * P + P * A + Q).norm(), 1e-10 * Q.norm());
    EXPECT_LT((P - P.transpose()).norm(), 1e-12);
  }
}

TEST(SolveLyapunov, RejectsUnstableOrIndefinite) {
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_THROW(lyap::solve_lyapunov(0.5 * I, I), CertificateError);
  EXPECT_THROW(lyap::solve_lyapunov(-I, -I), CertificateError);
}

TEST(SolveLyapunov, BenchmarkLinearization) {
  const auto sys = model::build_cstr({});
  const auto ss = model::solve_steady_inputs(sys, v2(0.57, 317.0), v2(0.57, 0.0));
  const auto lin = model::linearize(sys, v2(0.57, 317.0), ss.u);
  const Matrix P = lyap::solve_lyapunov(lin.A, Matrix::Identity(2, 2));
  EXPECT_NEAR(P(0, 0), 3.17489982, 1e-5);
  EXPECT_NEAR(P(0, 1), 0.93288061, 1e-5);
  EXPECT_NEAR(P(1, 1), 0.5972245, 1e-5);
  EXPECT_LE((P - benchmark_P()).cwiseAbs().maxCoeff(), 0.03);
}
