#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fpfuse/normalize.hpp"

using namespace fpfuse;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-90.0, -30.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = u(rng);
  return m;
}

}  // namespace

TEST(NormStats, PopulationZscore) {
  Matrix m(3, 1);
  m(0, 0) = -50;
  m(1, 0) = -60;
  m(2, 0) = -70;
  const NormStats s = fit_norm_stats(m, NormMode::DbmZscore);
  EXPECT_DOUBLE_EQ(s.mu[0], -60.0);
  EXPECT_NEAR(s.sigma[0], std::sqrt(200.0 / 3.0), 1e-12);
  const auto z = apply_norm(std::vector<double>{-60.0}, s);
  EXPECT_DOUBLE_EQ(z[0], 0.0);
}

TEST(NormStats, ZscoredTrainingHasZeroMeanUnitStd) {
  const Matrix m = random_matrix(200, 5, 3);
  const NormStats s = fit_norm_stats(m, NormMode::DbmZscore);
  const Matrix z = apply_norm(m, s);
  for (std::size_t c = 0; c < 5; ++c) {
    double mean = 0, sq = 0;
    for (std::size_t r = 0; r < 200; ++r) mean += z(r, c);
    mean /= 200;
    for (std::size_t r = 0; r < 200; ++r) sq += (z(r, c) - mean) * (z(r, c) - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt(sq / 200), 1.0, 1e-12);
  }
}

TEST(NormStats, ConstantColumnFloored) {
  Matrix m(4, 2, -70.0);
  m(1, 1) = -60.0;
  const NormStats s = fit_norm_stats(m, NormMode::DbmZscore);
  EXPECT_TRUE(s.floored[0]);
  EXPECT_FALSE(s.floored[1]);
  EXPECT_EQ(s.sigma[0], kSigmaFloor);
  const auto z = apply_norm(std::vector<double>{-70.0, -60.0}, s);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_TRUE(std::isfinite(z[1]));
}

TEST(NormStats, MilliwattModeComposesExactly) {
  const Matrix m = random_matrix(50, 3, 9);
  const NormStats s = fit_norm_stats(m, NormMode::MwZscore);
  Matrix mw(50, 3);
  for (std::size_t r = 0; r < 50; ++r)
    for (std::size_t c = 0; c < 3; ++c) mw(r, c) = std::pow(10.0, m(r, c) / 10.0);
  const NormStats ref = fit_norm_stats(mw, NormMode::DbmZscore);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(s.mu[c], ref.mu[c]);
    EXPECT_EQ(s.sigma[c], ref.sigma[c]);
  }
  const Matrix z = apply_norm(m, s);
  const Matrix zr = apply_norm(mw, ref);
  EXPECT_EQ(z, zr);
}

TEST(NormStats, DimensionMismatchRejected) {
  const NormStats s = fit_norm_stats(random_matrix(10, 3, 1), NormMode::DbmZscore);
  EXPECT_THROW(apply_norm(std::vector<double>{-50.0, -60.0}, s), Error);
}

TEST(ChannelVariances, UnbiasedPlusShrinkage) {
  Matrix m(4, 2, 3.0);
  m(0, 1) = 1;
  m(1, 1) = 2;
  m(2, 1) = 3;
  m(3, 1) = 4;
  const ChannelVariances v = fit_channel_variances(m);
  EXPECT_EQ(v.var[0], 1e-6);
  EXPECT_NEAR(v.var[1], 5.0 / 3.0 + 1e-6, 1e-15);
}

TEST(ChannelVariances, ZscoredTrainingNearOne) {
  const Matrix m = random_matrix(1000, 4, 5);
  const ChannelVariances v = fit_channel_variances(apply_norm(m, fit_norm_stats(m, NormMode::DbmZscore)));
  for (double x : v.var) EXPECT_NEAR(x, 1000.0 / 999.0 + 1e-6, 1e-9);
  for (double x : v.var) EXPECT_GT(x, 0.0);
}
