#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fpfuse/error.hpp"
#include "fpfuse/persistence.hpp"
#include "oracles.hpp"

using namespace fpfuse;

namespace {

void expect_same_pairs(const std::vector<PersistencePair>& got, const std::vector<PersistencePair>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i].birth, want[i].birth, 1e-12);
    EXPECT_NEAR(got[i].death, want[i].death, 1e-12);
  }
}

}  // namespace

TEST(Persistence, UnitSquareHasOneLoop) {
  const std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto d = vr_persistence(sq);
  ASSERT_EQ(d.h0.size(), 3u);
  for (const auto& p : d.h0) {
    EXPECT_EQ(p.birth, 0.0);
    EXPECT_NEAR(p.death, 1.0, 1e-9);
  }
  ASSERT_EQ(d.h1.size(), 1u);
  EXPECT_NEAR(d.h1[0].birth, 1.0, 1e-9);
  EXPECT_NEAR(d.h1[0].death, std::sqrt(2.0), 1e-9);
}

TEST(Persistence, CollinearPointsHaveNoLoops) {
  const std::vector<Point2> line{{0, 0}, {1, 0}, {2.5, 0}, {3, 0}};
  const auto d = vr_persistence(line);
  EXPECT_TRUE(d.h1.empty());
  ASSERT_EQ(d.h0.size(), 3u);
  EXPECT_NEAR(d.h0[0].death, 0.5, 1e-12);
  EXPECT_NEAR(d.h0[1].death, 1.0, 1e-12);
  EXPECT_NEAR(d.h0[2].death, 1.5, 1e-12);
}

TEST(Persistence, MatchesBoundaryReductionOnRandomClouds) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 6);
    std::vector<Point2> pts(n);
    for (auto& p : pts) p = {u(gen), u(gen)};
    const auto got = vr_persistence(pts);
    const auto want = oracle::rips_boundary_reduction(pts);
    expect_same_pairs(got.h0, want.h0);
    expect_same_pairs(got.h1, want.h1);
  }
}

TEST(Persistence, MatchesBoundaryReductionOnCurves) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> f(8);
    for (auto& v : f) v = g(gen);
    const auto cloud = embed_curve(f);
    expect_same_pairs(vr_persistence(cloud).h1, oracle::rips_boundary_reduction(cloud).h1);
  }
}

TEST(Persistence, RegularHexagonLoop) {
  std::vector<Point2> hex;
  for (int i = 0; i < 6; ++i) hex.push_back({std::cos(i * M_PI / 3), std::sin(i * M_PI / 3)});
  const auto d = vr_persistence(hex);
  ASSERT_EQ(d.h1.size(), 1u);
  EXPECT_NEAR(d.h1[0].birth, 1.0, 1e-9);
  EXPECT_NEAR(d.h1[0].death, std::sqrt(3.0), 1e-9);
}

TEST(Persistence, H0HasNMinusOneBars) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 2; n <= 20; ++n) {
    std::vector<Point2> pts(n);
    for (auto& p : pts) p = {u(gen), u(gen)};
    const auto d = vr_persistence(pts);
    EXPECT_EQ(d.h0.size(), n - 1);
    for (const auto& p : d.h1) EXPECT_GT(p.death, p.birth);
  }
}

TEST(Persistence, SizeLimits) {
  EXPECT_THROW(vr_persistence(std::vector<Point2>{{0, 0}}), Error);
  EXPECT_THROW(vr_persistence(std::vector<Point2>(kMaxCloudSize + 1)), Error);
}

TEST(Entropy, HandCases) {
  const std::vector<PersistencePair> two{{0, 1}, {0, 1}};
  EXPECT_NEAR(persistence_entropy(two), std::log(2.0), 1e-12);
  const std::vector<PersistencePair> one{{0, 3}};
  EXPECT_EQ(persistence_entropy(one), 0.0);
  EXPECT_EQ(persistence_entropy(std::vector<PersistencePair>{}), 0.0);
  const std::vector<PersistencePair> skewed{{0, 1}, {0, 3}};
  EXPECT_NEAR(persistence_entropy(skewed), -(0.25 * std::log(0.25) + 0.75 * std::log(0.75)), 1e-12);
  const std::vector<PersistencePair> with_zero{{0, 1}, {0, 1}, {2, 2}};
  EXPECT_NEAR(persistence_entropy(with_zero), std::log(2.0), 1e-12);
}

TEST(Entropy, BoundedByLogCount) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<PersistencePair> pairs(1 + static_cast<std::size_t>(t % 10));
    for (auto& p : pairs) p = {0.0, u(gen)};
    const double h = persistence_entropy(pairs);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(static_cast<double>(pairs.size())) + 1e-12);
  }
}

TEST(Embedding, OneBasedIndex) {
  const std::vector<double> f{0.5, -1.0, 2.0};
  const auto c = embed_curve(f);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].x, 1.0);
  EXPECT_EQ(c[2].x, 3.0);
  EXPECT_EQ(c[1].y, -1.0);
  EXPECT_THROW(embed_curve(std::vector<double>{1.0}), Error);
}

TEST(PhFeatures, NopZeroIsDimMinusOne) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> f(10);
  for (auto& v : f) v = g(gen);
  const PhFeatures p = fingerprint_ph_features(f);
  EXPECT_EQ(p.nop0, 9.0);
  EXPECT_GE(p.pe0, 0.0);
  EXPECT_GE(p.nop1, 0.0);
}

TEST(Augment, AppendsZScoredFeatures) {
  const std::vector<PhFeatures> train{{9, 1.0, 1, 0.0}, {9, 2.0, 3, 0.5}, {9, 3.0, 2, 1.0}};
  const PhFeatureStats s = fit_ph_stats(train);
  EXPECT_EQ(s.sigma[0], 1.0);
  EXPECT_NEAR(s.mu[1], 2.0, 1e-12);
  EXPECT_NEAR(s.sigma[1], std::sqrt(2.0 / 3.0), 1e-12);
  const std::vector<double> f{0.1, 0.2};
  const auto out = augment(f, train[2], s);
  ASSERT_EQ(out.size(), 6u);
  EXPECT_EQ(out[0], 0.1);
  EXPECT_EQ(out[1], 0.2);
  EXPECT_EQ(out[2], 0.0);
  EXPECT_NEAR(out[3], 1.0 / std::sqrt(2.0 / 3.0), 1e-12);

  Matrix m(3, 2);
  const Matrix aug = augment_matrix(m, train, s);
  EXPECT_EQ(aug.cols(), 6u);
  double col_mean = 0.0;
  for (std::size_t r = 0; r < 3; ++r) col_mean += aug(r, 3);
  EXPECT_NEAR(col_mean, 0.0, 1e-12);
}
