#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpfuse/pipeline.hpp"

namespace fpfuse {

struct StageLatency {
  std::string stage;
  double median_ns = 0.0;
};

struct ScalingSeries {
  std::string parameter;  // "T", "M_p", "S"
  std::vector<double> values;
  std::vector<double> median_ns;
  double slope = 0.0;  // least-squares slope of log latency vs log parameter
};

struct BenchReport {
  std::size_t n_queries = 0;
  std::vector<StageLatency> stages;
  std::vector<ScalingSeries> scaling;
  double kf_filter_ns = 0.0;
  double pf_filter_ns = 0.0;  // at M_p = 10^4
  double none_filter_ns = 0.0;
  double pf_kf_ratio = 0.0;
};

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

BenchReport run_bench(const Pipeline& pipeline, std::size_t n_queries, std::uint64_t seed = 123);

}  // namespace fpfuse
