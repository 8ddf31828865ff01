#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fpfuse/noise.hpp"

using namespace fpfuse;

namespace {

constexpr std::size_t kDraws = 200000;

std::vector<double> diffs(const std::vector<double>& out, const std::vector<double>& in) {
  std::vector<double> d(out.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = out[i] - in[i];
  return d;
}

double stddev(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(Noise, ZeroIntensityIsIdentity) {
  const std::vector<double> x{0.3, -1.2, 2.0}, sigma{1.0, 0.5, 2.0};
  Rng rng(1);
  EXPECT_EQ(inject_gauss_jitter(x, sigma, 0.0, rng), x);
  EXPECT_EQ(inject_bursty(x, sigma, 0.0, 3.0, rng), x);
  EXPECT_EQ(inject_bursty(x, sigma, 0.5, 0.0, rng), x);
  EXPECT_EQ(inject_dbm_10pct(x, sigma, 0.0, rng), x);
}

TEST(Noise, GaussJitterMoments) {
  const std::vector<double> x(kDraws, 0.7), sigma(kDraws, 2.0);
  Rng rng(5);
  const auto d = diffs(inject_gauss_jitter(x, sigma, 0.1, rng), x);
  EXPECT_NEAR(stddev(d), 0.2, 0.2 * 0.02);
  EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0) / kDraws, 0.0, 0.005);
}

TEST(Noise, BurstyHitRateAndMagnitude) {
  const std::vector<double> x(kDraws, -0.4), sigma(kDraws, 1.5);
  Rng rng(9);
  const auto d = diffs(inject_bursty(x, sigma, 0.05, 2.0, rng), x);
  std::size_t hits = 0;
  double mag = 0.0, signed_sum = 0.0;
  for (double v : d)
    if (v != 0.0) {
      ++hits;
      mag += std::abs(v);
      signed_sum += v;
    }
  const double frac = static_cast<double>(hits) / kDraws;
  EXPECT_NEAR(frac, 0.05, 0.005);
  EXPECT_NEAR(mag / static_cast<double>(hits), 2.0 * 1.5, 0.1);
  EXPECT_NEAR(signed_sum / static_cast<double>(hits), 0.0, 0.2);
}

TEST(Noise, DbmLevelScalesStd) {
  const std::vector<double> x(kDraws, -70.0), sigma(kDraws, 5.0);
  Rng rng(2);
  const auto d = diffs(inject_dbm_10pct(x, sigma, 0.1, rng), x);
  EXPECT_NEAR(stddev(d), 0.5, 0.01);
}

TEST(Noise, DeterministicPerSeed) {
  const std::vector<double> x(100, 0.0), sigma(100, 1.0);
  NoiseSpec spec;
  spec.kind = NoiseKind::GaussJitter;
  Rng a(4), b(4), c(5);
  EXPECT_EQ(inject(spec, x, sigma, a), inject(spec, x, sigma, b));
  EXPECT_NE(inject(spec, x, sigma, a), inject(spec, x, sigma, c));
}

TEST(Noise, Labels) {
  NoiseSpec s;
  EXPECT_TRUE(s.applies_to_raw());
  EXPECT_EQ(s.label().rfind("dbm_10pct", 0), 0u);
  s.kind = NoiseKind::Bursty;
  EXPECT_FALSE(s.applies_to_raw());
  EXPECT_EQ(s.label().rfind("bursty", 0), 0u);
}
