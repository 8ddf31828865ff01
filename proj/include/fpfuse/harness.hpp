#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fpfuse/pipeline.hpp"
#include "fpfuse/stats.hpp"

namespace fpfuse {

struct CvGrids {
  std::vector<double> q_gamma{0.25, 0.5, 1.0};
  std::vector<std::size_t> n_particles{5000, 10000, 20000};
  std::vector<double> ess_tau{0.3, 0.5};
  std::vector<std::size_t> k{3, 5, 7, 9};
  std::vector<std::size_t> n_trees{100, 200, 400};
  std::vector<std::size_t> max_depth{16, 24, 28, 0};
  std::vector<double> alpha{0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> h{0.5, 0.75, 1.0};
};

struct CvCandidate {
  std::string stage;
  std::string label;
  double mean_rmse = 0.0;
  std::vector<double> fold_rmse;
};

struct CvSelection {
  PipelineConfig config;  // winners substituted; fusion grids collapsed to one point
  std::vector<CvCandidate> candidates;
};

// Sequential per-component sweep (filter, then regressors, then fusion) by
// mean fold RMSE on RP-stratified folds; ties go to the first grid entry.
// Filter candidates are scored by wKNN, regressor candidates by their own
// predictions, fusion candidates by the DST point.
CvSelection cv_grid_search(const RadioMap& train, const CvGrids& grids, const PipelineConfig& base,
                           std::size_t folds = 5, std::uint64_t seed = 123);

// RP-stratified fold id for every sample.
std::vector<std::size_t> stratified_folds(const RadioMap& map, std::size_t folds, std::uint64_t seed);

struct Variant {
  std::string name;
  bool use_ph = false;
  bool fused = false;
};

// PF+RF, PF+RF+KNN+DST, PF+PH+RF, PF+PH+RF+KNN+DST.
std::span<const Variant> ablation_variants();

struct LadderConfig {
  PipelineConfig pipeline;
  SplitSpec split;
  std::vector<NoiseSpec> noise{NoiseSpec{}};
  std::size_t repeats = 10;
  std::size_t threads = 0;  // 0 = default_threads()
  double alpha = 0.05;
};

struct Comparison {
  std::string condition;
  std::string baseline;
  std::string candidate;
  TestResult wilcoxon_samples;  // across test samples of the canonical split
  TestResult wilcoxon_splits;   // across repeats, on RMSE
  TestResult t_splits;
  double holm_samples = 1.0;
  double holm_splits = 1.0;
  bool reject_samples = false;
  bool reject_splits = false;
};

struct EvalReport {
  std::vector<std::string> variants;
  std::vector<std::string> conditions;  // "clean" first
  // rmse[variant][condition][repeat]
  std::vector<std::vector<std::vector<double>>> rmse;
  // DST variants: same layout, alternative point rules and fusion modes.
  std::map<std::string, std::vector<std::vector<std::vector<double>>>> alternatives;
  // per-sample Euclidean errors of repeat 0, [variant][condition]
  std::vector<std::vector<std::vector<double>>> canonical_errors;
  std::vector<std::vector<ConfidenceInterval>> ci;
  std::vector<Comparison> comparisons;
  std::map<std::string, double> runtime_s;
  std::vector<std::string> selected_rules;  // fitted DST point rule per repeat (full variant)

  double mean_rmse(std::size_t variant, std::size_t condition) const;
  std::size_t variant_index(const std::string& name) const;
  std::size_t condition_index(const std::string& name) const;
};

// With one map, repeats use different split seeds on that map; with several
// maps, repeat r runs on maps[r] (repeats = maps.size()).
EvalReport run_ablation_ladder(std::span<const RadioMap> maps, const LadderConfig& config);

void write_report_json(const EvalReport& report, const std::filesystem::path& path);
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);

// One "name  mean +- half_width" line per variant.
std::string format_ci_table(const EvalReport& report, std::size_t condition);

}  // namespace fpfuse
