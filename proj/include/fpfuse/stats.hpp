#pragma once

#include <span>
#include <vector>

#include "fpfuse/types.hpp"

namespace fpfuse {

double rmse_xy(std::span<const Position> pred, std::span<const Position> truth);

struct TestResult {
  double statistic = 0.0;  // W+ for Wilcoxon, t for the t-test
  double p_value = 1.0;
  std::size_t n = 0;       // effective sample size
  bool exact = false;
  bool degenerate = false;
};

inline constexpr std::size_t kWilcoxonExactMax = 20;

// Two-sided paired Wilcoxon signed-rank test on a - b. Zero differences are
// dropped, tied magnitudes get average ranks.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// Two-sided paired t-test on a - b with n-1 degrees of freedom.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b);

double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);
double student_t_quantile(double prob, double dof);

struct HolmResult {
  std::vector<double> adjusted;  // in input order
  std::vector<bool> reject;
};

HolmResult holm_bonferroni(std::span<const double> pvals, double alpha = 0.05);

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// mean +- t_{(1+level)/2, n-1} * sd / sqrt(n).
ConfidenceInterval t_confidence_interval(std::span<const double> values, double level = 0.95);

double mean(std::span<const double> v);
double sample_stddev(std::span<const double> v);
double median(std::vector<double> v);

}  // namespace fpfuse
