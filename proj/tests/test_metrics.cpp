#include <gtest/gtest.h>

#include <cmath>

#include "snmpc/error.hpp"
#include "snmpc/fokker_planck.hpp"
#include "snmpc/metrics.hpp"

using namespace snmpc;

namespace {

const fp::Grid1D kGrid(0.0, 2.0, 200);
const fp::Grid1D kFine(-1.0, 2.0, 6000);

fp::DensityField normal(double mean, double var, const fp::Grid1D& grid = kGrid) {
  return fp::density_from_normal(mean, var, grid).field;
}

fp::DensityField halves(bool upper) {
  std::vector<double> w(200, 0.0);
  for (int i = upper ? 100 : 0; i < (upper ? 200 : 100); ++i) w[i] = 1.0;
  return fp::DensityField::from_weights(kGrid, w);
}

}  // namespace

TEST(Bhattacharyya, IdenticalAndDisjoint) {
  const auto p = normal(0.57, 4e-4);
  EXPECT_NEAR(metrics::bhattacharyya(p, p), 1.0, 1e-12);
  EXPECT_NEAR(metrics::bhattacharyya(halves(false), halves(true)), 0.0, 1e-12);
}

TEST(Bhattacharyya, GaussianPair) {
  const double bc = metrics::bhattacharyya(normal(0.5, 1e-2, kFine), normal(0.6, 1e-2, kFine));
  EXPECT_NEAR(bc, 0.8824969026, 1e-4);
}

TEST(Bhattacharyya, RequiresMatchingGrids) {
  EXPECT_THROW(metrics::bhattacharyya(normal(0.5, 1e-2), normal(0.5, 1e-2, kFine)), MetricError);
}

TEST(Hellinger, Cases) {
  const auto p = normal(0.57, 4e-4);
  EXPECT_NEAR(metrics::hellinger(p, p), 0.0, 1e-6);
  EXPECT_NEAR(metrics::hellinger(halves(false), halves(true)), 1.0, 1e-12);
  EXPECT_NEAR(metrics::hellinger(normal(0.5, 1e-2, kFine), normal(0.6, 1e-2, kFine)), 0.342787248, 2e-4);
}

TEST(Hellinger, IsSymmetricAndTriangular) {
  const auto a = normal(0.5, 4e-3), b = normal(0.7, 2e-3), c = normal(0.9, 8e-3);
  EXPECT_DOUBLE_EQ(metrics::hellinger(a, b), metrics::hellinger(b, a));
  EXPECT_LE(metrics::hellinger(a, c), metrics::hellinger(a, b) + metrics::hellinger(b, c) + 1e-12);
}

TEST(TailProbability, Uniform) {
  const auto u = fp::density_from_beta(model::Beta4Distribution(0.0, 2.0, 1.0, 1.0), kGrid);
  EXPECT_NEAR(metrics::tail_probability(u, 0.53, metrics::Tail::below).probability, 0.265, 1e-12);
  EXPECT_NEAR(metrics::tail_probability(u, 0.53, metrics::Tail::above).probability, 0.735, 1e-12);
}

TEST(TailProbability, Edges) {
  const auto p = normal(0.57, 4e-4);
  EXPECT_EQ(metrics::tail_probability(p, 0.0, metrics::Tail::below).probability, 0.0);
  const auto out = metrics::tail_probability(p, -1.0, metrics::Tail::below);
  EXPECT_TRUE(out.outside_grid);
  EXPECT_EQ(out.probability, 0.0);
  const auto over = metrics::tail_probability(p, 3.0, metrics::Tail::below);
  EXPECT_TRUE(over.outside_grid);
  EXPECT_EQ(over.probability, 1.0);
}

TEST(TailProbability, ReferenceNormal) {
  const auto p = normal(0.57, 4e-4);
  // 0.53 sits on a face, so the cell sum is exact up to truncation.
  EXPECT_NEAR(metrics::tail_probability(p, 0.53, metrics::Tail::below).probability, 0.0227501319, 1e-6);
}

TEST(Moments, Cases) {
  const auto sym = normal(1.0, 0.01);
  EXPECT_NEAR(metrics::moments(sym).mean, 1.0, 1e-12);
  std::vector<double> w(200, 0.0);
  w[42] = 1.0;
  const auto point = fp::DensityField::from_masses(kGrid, w);
  EXPECT_NEAR(metrics::moments(point).mean, kGrid.center(42), 1e-15);
  EXPECT_EQ(metrics::moments(point).variance, 0.0);
  const auto ref = metrics::moments(normal(0.57, 4e-4));
  EXPECT_NEAR(ref.mean, 0.57, 1e-3);
  EXPECT_NEAR(ref.variance, 4e-4, 0.1 * 4e-4);
}

TEST(Compare, BundlesMetricsAndMoments) {
  const auto p = normal(0.6, 4e-4), q = normal(0.57, 4e-4);
  const auto r = metrics::compare(p, q);
  EXPECT_DOUBLE_EQ(r.hellinger, metrics::hellinger(p, q));
  EXPECT_DOUBLE_EQ(r.bhattacharyya, metrics::bhattacharyya(p, q));
  EXPECT_DOUBLE_EQ(r.mean, metrics::moments(p).mean);
}
