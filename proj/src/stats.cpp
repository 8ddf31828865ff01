#include "fpfuse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fpfuse/error.hpp"

namespace fpfuse {

double rmse_xy(std::span<const Position> pred, std::span<const Position> truth) {
  require(pred.size() == truth.size(), ErrorKind::Dimension, "prediction and truth lengths differ");
  require(!pred.empty(), ErrorKind::Precondition, "RMSE of an empty set");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i].x - truth[i].x;
    const double dy = pred[i].y - truth[i].y;
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mean(std::span<const double> v) {
  require(!v.empty(), ErrorKind::Precondition, "mean of an empty set");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_stddev(std::span<const double> v) {
  require(v.size() >= 2, ErrorKind::Precondition, "standard deviation needs two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  require(!v.empty(), ErrorKind::Precondition, "median of an empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Dimension, "paired samples differ in length");
  require(a.size() >= 5, ErrorKind::Precondition, "Wilcoxon test needs at least 5 pairs");

  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  TestResult res;
  res.n = d.size();
  if (d.empty()) {
    res.degenerate = true;
    return res;
  }
  const std::size_t n = d.size();

  // Average ranks of |d|, kept doubled so ties stay integral.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const long r2 = static_cast<long>(i + j + 2);  // 2 * mean of 1-based ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  long w2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0.0) w2 += rank2[i];
  }
  res.statistic = 0.5 * static_cast<double>(w2);

  if (n <= kWilcoxonExactMax) {
    // Null distribution of the doubled W+ by subset-sum counting.
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (long r : rank2) {
      for (long s = reach; s >= 0; --s)
        if (count[static_cast<std::size_t>(s)] != 0.0) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
      reach += r;
    }
    // Symmetric about total2 / 2: count patterns at least as far from the center.
    const long dev = std::abs(2 * w2 - total2);
    double extreme = 0.0;
    for (long s = 0; s <= total2; ++s)
      if (std::abs(2 * s - total2) >= dev) extreme += count[static_cast<std::size_t>(s)];
    res.p_value = std::min(1.0, extreme / std::ldexp(1.0, static_cast<int>(n)));
    res.exact = true;
    return res;
  }

  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) {
    res.degenerate = true;
    return res;
  }
  const double dev = std::max(0.0, std::abs(res.statistic - mu) - 0.5);
  res.p_value = std::min(1.0, 2.0 * normal_sf(dev / std::sqrt(var)));
  return res;
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 10000; ++m) {
    const double dm = static_cast<double>(m);
    double num = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    f *= d * c;
    num = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < eps) return f;
  }
  fail(ErrorKind::Numeric, "incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, ErrorKind::Precondition, "beta parameters must be positive");
  require(x >= 0.0 && x <= 1.0, ErrorKind::Precondition, "incomplete beta argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  require(dof > 0.0, ErrorKind::Precondition, "degrees of freedom must be positive");
  if (std::isnan(t)) return t;
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double prob, double dof) {
  require(prob > 0.0 && prob < 1.0, ErrorKind::Precondition, "quantile probability must be in (0, 1)");
  if (prob == 0.5) return 0.0;
  double lo = -1.0, hi = 1.0;
  while (student_t_cdf(lo, dof) > prob) lo *= 2.0;
  while (student_t_cdf(hi, dof) < prob) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < prob) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

TestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Dimension, "paired samples differ in length");
  require(a.size() >= 2, ErrorKind::Precondition, "paired t-test needs at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TestResult res;
  res.n = d.size();
  const double m = mean(d);
  const double sd = sample_stddev(d);
  if (!(sd > 0.0)) {
    res.degenerate = true;
    return res;
  }
  const double nn = static_cast<double>(d.size());
  res.statistic = m / (sd / std::sqrt(nn));
  res.p_value = std::min(1.0, 2.0 * student_t_cdf(-std::abs(res.statistic), nn - 1.0));
  return res;
}

HolmResult holm_bonferroni(std::span<const double> pvals, double alpha) {
  const std::size_t m = pvals.size();
  for (double p : pvals)
    require(p >= 0.0 && p <= 1.0, ErrorKind::Precondition, "p-values must lie in [0, 1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pvals[i] < pvals[j]; });
  HolmResult res;
  res.adjusted.assign(m, 1.0);
  res.reject.assign(m, false);
  double running = 0.0;
  bool rejecting = true;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const std::size_t i = order[rank];
    running = std::max(running, std::min(1.0, static_cast<double>(m - rank) * pvals[i]));
    res.adjusted[i] = running;
    rejecting = rejecting && running < alpha;
    res.reject[i] = rejecting;
  }
  return res;
}

ConfidenceInterval t_confidence_interval(std::span<const double> values, double level) {
  require(level > 0.0 && level < 1.0, ErrorKind::Precondition, "confidence level must be in (0, 1)");
  require(values.size() >= 2, ErrorKind::Precondition, "confidence interval needs at least 2 values");
  ConfidenceInterval ci;
  ci.mean = mean(values);
  const double n = static_cast<double>(values.size());
  const double q = student_t_quantile(0.5 * (1.0 + level), n - 1.0);
  ci.half_width = q * sample_stddev(values) / std::sqrt(n);
  ci.lower = ci.mean - ci.half_width;
  ci.upper = ci.mean + ci.half_width;
  return ci;
}

}  // namespace fpfuse
