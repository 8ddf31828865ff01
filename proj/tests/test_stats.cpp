#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <random>

#include "fpfuse/error.hpp"
#include "fpfuse/stats.hpp"
#include "oracles.hpp"

using namespace fpfuse;

TEST(Rmse, HandCasesAndSymmetry) {
  const std::vector<Position> a{{0, 0}, {1, 1}}, b{{3, 4}, {1, 1}};
  EXPECT_NEAR(rmse_xy(a, b), std::sqrt(25.0 / 2), 1e-12);
  EXPECT_EQ(rmse_xy(a, b), rmse_xy(b, a));
  EXPECT_EQ(rmse_xy(a, a), 0.0);
  EXPECT_THROW(rmse_xy(a, std::vector<Position>{{0, 0}}), Error);
}

TEST(Wilcoxon, SixPositiveDifferences) {
  const std::vector<double> a{2, 3, 4, 5, 6, 7}, b{1, 1, 1, 1, 1, 1};
  const TestResult r = wilcoxon_signed_rank(a, b);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.n, 6u);
  EXPECT_DOUBLE_EQ(r.p_value, 0.03125);
  EXPECT_EQ(r.statistic, 21.0);
}

TEST(Wilcoxon, MatchesEnumerationOracle) {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial % 8);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (trial % 2 == 0) {
        a[i] = g(gen) + 0.3;
        b[i] = g(gen);
      } else {
        // Integer data: ties and zero differences.
        a[i] = small(gen);
        b[i] = small(gen);
      }
    }
    const TestResult r = wilcoxon_signed_rank(a, b);
    if (r.degenerate) continue;
    EXPECT_NEAR(r.p_value, oracle::wilcoxon_enumerate(a, b), 1e-12) << "trial " << trial;
  }
}

TEST(Wilcoxon, NormalApproximationNearExactAtBoundary) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> a(21), b(21);
  for (std::size_t i = 0; i < 21; ++i) a[i] = g(gen) + 0.4, b[i] = g(gen);
  const TestResult approx = wilcoxon_signed_rank(a, b);
  EXPECT_FALSE(approx.exact);
  EXPECT_NEAR(approx.p_value, oracle::wilcoxon_enumerate(a, b), 0.01);
}

TEST(Wilcoxon, Degenerate) {
  const std::vector<double> a{1, 2, 3, 4, 5, 6};
  const TestResult same = wilcoxon_signed_rank(a, a);
  EXPECT_TRUE(same.degenerate);
  EXPECT_EQ(same.p_value, 1.0);
  const std::vector<double> four{1, 2, 3, 4}, zeros(4, 0.0);
  EXPECT_THROW(wilcoxon_signed_rank(four, zeros), Error);
}

TEST(PairedT, HandCase) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b(5, 0.0);
  const TestResult r = paired_t_test(a, b);
  EXPECT_NEAR(r.statistic, 4.242640687, 1e-8);
  EXPECT_NEAR(r.p_value, 0.01324, 1e-4);
  const std::vector<double> shifted{2, 3, 4, 5, 6};
  EXPECT_TRUE(paired_t_test(shifted, a).degenerate);
}

TEST(StudentT, MatchesBoost) {
  for (double dof : {1.0, 2.0, 4.0, 9.0, 30.0, 200.0}) {
    const boost::math::students_t_distribution<double> dist(dof);
    for (double t = -8.0; t <= 8.0; t += 0.37) {
      EXPECT_NEAR(student_t_cdf(t, dof), boost::math::cdf(dist, t), 1e-10) << dof << " " << t;
    }
    for (double p : {0.005, 0.025, 0.3, 0.5, 0.9, 0.975}) {
      EXPECT_NEAR(student_t_quantile(p, dof), boost::math::quantile(dist, p), 1e-8);
    }
  }
  EXPECT_NEAR(regularized_incomplete_beta(2.0, 3.0, 0.4), 0.5248, 1e-12);
}

TEST(Holm, HandCase) {
  const std::vector<double> p{0.01, 0.04, 0.03, 0.005};
  const HolmResult h = holm_bonferroni(p);
  EXPECT_NEAR(h.adjusted[3], 0.02, 1e-15);
  EXPECT_NEAR(h.adjusted[0], 0.03, 1e-15);
  EXPECT_NEAR(h.adjusted[2], 0.06, 1e-15);
  EXPECT_NEAR(h.adjusted[1], 0.06, 1e-15);
  EXPECT_EQ(h.reject, (std::vector<bool>{true, false, false, true}));
}

TEST(Holm, MonotoneAndBounded) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(1 + static_cast<std::size_t>(trial % 12));
    for (auto& v : p) v = u(gen);
    const HolmResult h = holm_bonferroni(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(h.adjusted[i], p[i]);
      EXPECT_LE(h.adjusted[i], 1.0);
      for (std::size_t j = 0; j < p.size(); ++j)
        if (p[i] < p[j]) EXPECT_LE(h.adjusted[i], h.adjusted[j]);
    }
  }
}

TEST(ConfidenceInterval, KnownValues) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const ConfidenceInterval ci = t_confidence_interval(v);
  const double half = 2.776445105 * std::sqrt(2.5) / std::sqrt(5.0);
  EXPECT_NEAR(ci.mean, 3.0, 1e-15);
  EXPECT_NEAR(ci.half_width, half, 1e-8);
  EXPECT_NEAR(ci.lower, 3.0 - half, 1e-8);
  EXPECT_NEAR(ci.upper, 3.0 + half, 1e-8);
  EXPECT_THROW(t_confidence_interval(std::vector<double>{1.0}), Error);
}

TEST(Descriptive, MeanStdMedian) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_EQ(mean(v), 2.5);
  EXPECT_NEAR(sample_stddev(v), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(median(v), 2.5);
  EXPECT_EQ(median({5, 1, 3}), 3.0);
}

TEST(Holm, SmallLadders) {
  const HolmResult single = holm_bonferroni(std::vector<double>{0.2});
  EXPECT_EQ(single.adjusted[0], 0.2);
  const HolmResult two = holm_bonferroni(std::vector<double>{0.01, 0.04});
  EXPECT_EQ(two.adjusted, (std::vector<double>{0.02, 0.04}));
  EXPECT_EQ(two.reject, (std::vector<bool>{true, true}));
  const HolmResult three = holm_bonferroni(std::vector<double>{0.03, 0.03, 0.03});
  for (double a : three.adjusted) EXPECT_NEAR(a, 0.09, 1e-15);
  EXPECT_EQ(three.reject, (std::vector<bool>{false, false, false}));
}

TEST(PairedT, SymmetricDiffsAndZeroVariance) {
  const std::vector<double> a{1, -1, 2, -2}, zeros(4, 0.0);
  const TestResult r = paired_t_test(a, zeros);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
  EXPECT_TRUE(paired_t_test(std::vector<double>{2, 3}, std::vector<double>{1, 2}).degenerate);
}
