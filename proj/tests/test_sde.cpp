#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "snmpc/error.hpp"
#include "snmpc/sde.hpp"

using namespace snmpc;
using model::Matrix;
using model::Vector;

namespace {

model::ControlAffineSde scalar(double a, double sigma, double half_width = 50.0) {
  return model::ControlAffineSde(
      1, 1, 1, [a](const Vector& x) { return Vector(a * x); },
      [](const Vector&) { return Matrix::Identity(1, 1); },
      [sigma](const Vector&) { return Matrix::Constant(1, 1, sigma); },
      model::Box{Vector::Constant(1, -half_width), Vector::Constant(1, half_width)});
}

sde::InitialSampler fixed(double x0) {
  return [x0](sde::WienerStream&) { return Vector::Constant(1, x0); };
}

ControlPolicy zero_input(double horizon) {
  return ControlPolicy::constant(horizon, 1, Vector::Zero(1));
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

}  // namespace

TEST(WienerStream, SameIdsSameIncrements) {
  sde::WienerStream a(11, 3, 0.01), b(11, 3, 0.01), c(11, 4, 0.01);
  Eigen::VectorXd da(2), db(2), dc(2);
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    a.increment(da);
    b.increment(db);
    c.increment(dc);
    EXPECT_EQ(da, db);
    differs = differs || da != dc;
  }
  EXPECT_TRUE(differs);
}

TEST(SimulatePath, NoDynamicsKeepsInitialState) {
  const auto sys = scalar(0.0, 0.0);
  sde::WienerStream s(1, 0, 0.01);
  const auto rec = sde::simulate_path(sys, Vector::Constant(1, 0.7), zero_input(1.0), s, 1.0);
  ASSERT_EQ(rec.size(), 101u);
  for (const auto& x : rec.states) EXPECT_EQ(x[0], 0.7);
  EXPECT_EQ(rec.clip_events, 0);
}

TEST(SimulatePath, LinearDecayConvergesToExponential) {
  const auto sys = scalar(-1.0, 0.0);
  for (double dt : {0.01, 0.001}) {
    sde::WienerStream s(1, 0, dt);
    const auto rec = sde::simulate_path(sys, Vector::Constant(1, 1.0), zero_input(1.0), s, 1.0);
    EXPECT_NEAR(rec.states.back()[0], std::exp(-1.0), dt);
  }
}

TEST(SimulatePath, RecordEveryKeepsFinalInstant) {
  const auto sys = scalar(-1.0, 0.1);
  sde::WienerStream s(1, 0, 0.01);
  const auto rec = sde::simulate_path(sys, Vector::Constant(1, 1.0), zero_input(1.0), s, 1.0, 30);
  ASSERT_EQ(rec.size(), 5u);
  EXPECT_NEAR(rec.times.back(), 1.0, 1e-12);
  EXPECT_EQ(rec.index_of(0.3), 1);
  EXPECT_EQ(rec.index_of(0.31), -1);
}

TEST(SimulatePath, ClampsOntoDomainAndCounts) {
  const auto sys = scalar(5.0, 0.0, 1.0);
  sde::WienerStream s(1, 0, 0.01);
  const auto rec = sde::simulate_path(sys, Vector::Constant(1, 0.9), zero_input(1.0), s, 1.0);
  EXPECT_EQ(rec.states.back()[0], 1.0);
  EXPECT_GT(rec.clip_events, 0);
}

TEST(SimulatePath, DivergenceRaises) {
  const model::ControlAffineSde sys(
      1, 1, 1, [](const Vector& x) { return Vector(Vector::Constant(1, 1.0 / (x[0] - 0.5))); },
      [](const Vector&) { return Matrix::Identity(1, 1); },
      [](const Vector&) { return Matrix::Zero(1, 1); },
      model::Box{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)});
  sde::WienerStream s(1, 0, 0.01);
  EXPECT_THROW(sde::simulate_path(sys, Vector::Constant(1, 0.5), zero_input(1.0), s, 1.0),
               NumericError);
}

TEST(Ensemble, PureNoiseVarianceGrowsLinearly) {
  const double sigma = 0.5, t = 2.0;
  const int n = 10000;
  sde::EnsembleOptions opt;
  opt.seed = 3;
  opt.dt = 0.01;
  opt.t_end = t;
  opt.record_every = 200;
  const auto paths = sde::simulate_ensemble(scalar(0.0, sigma), fixed(0.0), zero_input(t), n, opt);
  double s1 = 0.0, s2 = 0.0;
  for (const auto& p : paths) {
    s1 += p.states.back()[0];
    s2 += p.states.back()[0] * p.states.back()[0];
  }
  const double mean = s1 / n;
  const double var = (s2 - n * mean * mean) / (n - 1);
  const double exact = sigma * sigma * t;
  EXPECT_LT(std::abs(var - exact), 3.0 * exact * std::sqrt(2.0 / (n - 1)));
}

TEST(Ensemble, OuWeakConvergence) {
  const double theta = 1.0, sigma = 0.5, x0 = 1.0, t = 1.0;
  const int n = 10000;
  sde::EnsembleOptions opt;
  opt.seed = 5;
  opt.dt = 0.005;
  opt.t_end = t;
  opt.record_every = 200;
  const auto paths =
      sde::simulate_ensemble(model::build_ou(theta, sigma, 10.0), fixed(x0), zero_input(t), n, opt);
  double s1 = 0.0, s2 = 0.0;
  for (const auto& p : paths) {
    s1 += p.states.back()[0];
    s2 += p.states.back()[0] * p.states.back()[0];
  }
  const double mean = s1 / n;
  const double var = (s2 - n * mean * mean) / (n - 1);
  const double m_exact = x0 * std::exp(-theta * t);
  const double v_exact = sigma * sigma * (1.0 - std::exp(-2.0 * theta * t)) / (2.0 * theta);
  // Euler bias is O(dt), well below the sampling error here.
  EXPECT_LT(std::abs(mean - m_exact), 3.0 * std::sqrt(v_exact / n) + opt.dt);
  EXPECT_LT(std::abs(var - v_exact), 3.0 * v_exact * std::sqrt(2.0 / (n - 1)) + opt.dt);
}

TEST(Ensemble, SinglePathMatchesSimulatePath) {
  const auto sys = model::build_ou(1.0, 0.3, 5.0);
  sde::EnsembleOptions opt;
  opt.seed = 9;
  opt.t_end = 1.0;
  const auto paths = sde::simulate_ensemble(sys, fixed(0.2), zero_input(1.0), 1, opt);
  sde::WienerStream s(9, 0, opt.dt);
  const auto ref = sde::simulate_path(sys, Vector::Constant(1, 0.2), zero_input(1.0), s, 1.0);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].states, ref.states);
}

TEST(Ensemble, DeterministicAndSerialEqualsParallel) {
  const auto sys = model::build_cstr({});
  const model::Beta4Distribution beta(0.0, 2.0, 320.0, 320.0);
  const sde::InitialSampler start = [&](sde::WienerStream& s) {
    Vector x(2);
    x << beta.sample(s.engine()), 315.0;
    return x;
  };
  Vector u(2);
  u << 0.5708, 8.6714;
  const auto policy = ControlPolicy::constant(5.0, 5, u);
  sde::EnsembleOptions opt;
  opt.seed = 21;
  opt.t_end = 5.0;
  opt.record_every = 50;
  const auto a = sde::simulate_ensemble(sys, start, policy, 200, opt);
  const auto b = sde::simulate_ensemble(sys, start, policy, 200, opt);
  const auto c = sde::simulate_ensemble_serial(sys, start, policy, 200, opt);
  ASSERT_EQ(a.size(), 200u);
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(a[i].states, b[i].states);
    EXPECT_EQ(a[i].states, c[i].states);
    EXPECT_EQ(a[i].times, c[i].times);
  }
  EXPECT_NE(a[0].states.front(), a[1].states.front());
}

TEST(Histogram, IdenticalSamplesOccupyOneBin) {
  const fp::Grid1D grid(0.0, 2.0, 200);
  const auto h = sde::empirical_histogram(std::vector<double>(50, 0.573), grid);
  EXPECT_EQ(std::count_if(h.masses().begin(), h.masses().end(), [](double m) { return m > 0.0; }), 1);
  EXPECT_DOUBLE_EQ(h.mass(grid.locate(0.573)), 1.0);
}

TEST(Histogram, UniformSamplesSpreadEvenly) {
  const fp::Grid1D grid(0.0, 2.0, 200);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> xs(200000);
  for (auto& x : xs) x = u(rng);
  const auto h = sde::empirical_histogram(xs, grid);
  EXPECT_NEAR(h.total_mass(), 1.0, 1e-12);
  for (double m : h.masses()) EXPECT_NEAR(m, 0.005, 5.0 * std::sqrt(0.005 / 200000.0));
}

TEST(Histogram, PureDiffusionWithinDkwBand) {
  const double sigma = 0.2, t = 1.0;
  const int n = 10000;
  sde::EnsembleOptions opt;
  opt.seed = 17;
  opt.dt = 0.01;
  opt.t_end = t;
  opt.record_every = 100;
  const auto paths = sde::simulate_ensemble(scalar(0.0, sigma), fixed(1.0), zero_input(t), n, opt);
  const fp::Grid1D grid(0.0, 2.0, 200);
  const auto h = sde::empirical_histogram(paths, 0, t, grid);
  const double band = std::sqrt(std::log(2.0 / 0.01) / (2.0 * n));
  double cum = 0.0, worst = 0.0;
  for (int i = 0; i < grid.n_cells() - 1; ++i) {
    cum += h.mass(i);
    worst = std::max(worst, std::abs(cum - normal_cdf(grid.face(i + 1), 1.0, sigma * std::sqrt(t))));
  }
  EXPECT_LT(worst, band);
}

TEST(Histogram, TimeOffRecordGridIsRejected) {
  sde::EnsembleOptions opt;
  opt.t_end = 1.0;
  opt.record_every = 10;
  const auto paths = sde::simulate_ensemble(scalar(0.0, 0.1), fixed(0.0), zero_input(1.0), 3, opt);
  EXPECT_THROW(sde::empirical_histogram(paths, 0, 0.05, fp::Grid1D(-1.0, 1.0, 20)), ConfigError);
}

TEST(EnsembleCsv, HeaderAndRows) {
  sde::EnsembleOptions opt;
  opt.t_end = 0.1;
  opt.record_every = 5;
  const auto paths = sde::simulate_ensemble(scalar(0.0, 0.1), fixed(0.0), zero_input(0.1), 2, opt);
  std::ostringstream out;
  sde::write_ensemble_csv(out, paths, {"x"}, {"u"});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time,realization_id,x,u");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2 * 3);
}
