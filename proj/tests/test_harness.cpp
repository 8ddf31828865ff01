#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "fpfuse/error.hpp"
#include "fpfuse/harness.hpp"

using namespace fpfuse;

TEST(Folds, StratifiedPerRp) {
  const RadioMap map = synth_radio_map(fixture::small_spec());
  const auto folds = stratified_folds(map, 5, 3);
  ASSERT_EQ(folds.size(), map.size());
  // Every RP has 20 samples, so each fold holds exactly 4 of them.
  std::map<std::pair<std::int64_t, std::size_t>, int> count;
  for (std::size_t i = 0; i < map.size(); ++i) {
    ASSERT_LT(folds[i], 5u);
    ++count[{map.samples[i].rp_id, folds[i]}];
  }
  for (const auto& [key, n] : count) EXPECT_EQ(n, 4);
  EXPECT_EQ(folds, stratified_folds(map, 5, 3));
}

TEST(Folds, TooFewSamplesPerRp) {
  SynthSpec s = fixture::small_spec();
  s.samples_per_rp = 3;
  const RadioMap map = synth_radio_map(s);
  EXPECT_THROW(stratified_folds(map, 5, 1), Error);
  EXPECT_THROW(stratified_folds(map, 1, 1), Error);
}

TEST(Cv, SinglePointGridReturnsIt) {
  const RadioMap map = synth_radio_map(fixture::small_spec());
  CvGrids g;
  g.q_gamma = {0.25};
  g.n_particles = {100};
  g.ess_tau = {0.5};
  g.k = {5};
  g.n_trees = {10};
  g.max_depth = {8};
  g.alpha = {2.0};
  g.h = {0.75};
  const CvSelection sel = cv_grid_search(map, g, fixture::fast_config(), 3, 7);
  EXPECT_EQ(sel.config.q_gamma, 0.25);
  EXPECT_EQ(sel.config.pf.n_particles, 100u);
  EXPECT_EQ(sel.config.pf.ess_tau, 0.5);
  EXPECT_EQ(sel.config.k, 5u);
  EXPECT_EQ(sel.config.rf.n_trees, 10u);
  EXPECT_EQ(sel.config.rf.max_depth, 8u);
  EXPECT_EQ(sel.config.alpha_grid, std::vector<double>{2.0});
  EXPECT_EQ(sel.config.h_grid, std::vector<double>{0.75});
  EXPECT_FALSE(sel.candidates.empty());
  for (const auto& c : sel.candidates) {
    EXPECT_EQ(c.fold_rmse.size(), 3u);
    EXPECT_TRUE(std::isfinite(c.mean_rmse));
  }
}

TEST(Cv, PicksBetterK) {
  const RadioMap map = synth_radio_map(fixture::small_spec());
  CvGrids g;
  g.q_gamma = {0.5};
  g.n_particles = {100};
  g.ess_tau = {0.3};
  g.k = {3, 5};
  g.n_trees = {10};
  g.max_depth = {8};
  g.alpha = {1.0};
  g.h = {1.0};
  const CvSelection sel = cv_grid_search(map, g, fixture::fast_config(), 3, 7);
  double best = 1e300;
  std::size_t best_k = 0;
  for (const auto& c : sel.candidates)
    if (c.stage == "knn" && c.mean_rmse < best) {
      best = c.mean_rmse;
      best_k = c.label == "k=3" ? 3 : 5;
    }
  ASSERT_NE(best_k, 0u);
  EXPECT_EQ(sel.config.k, best_k);
}

namespace {

LadderConfig small_ladder() {
  LadderConfig cfg;
  cfg.pipeline = fixture::fast_config();
  cfg.repeats = 2;
  NoiseSpec gauss;
  gauss.kind = NoiseKind::GaussJitter;
  cfg.noise = {NoiseSpec{}, gauss};
  return cfg;
}

}  // namespace

TEST(Ladder, ShapeAndContents) {
  const RadioMap map = synth_radio_map(fixture::small_spec());
  const LadderConfig cfg = small_ladder();
  const EvalReport r = run_ablation_ladder(std::span<const RadioMap>(&map, 1), cfg);
  ASSERT_EQ(r.variants.size(), 4u);
  EXPECT_EQ(r.variants[0], "PF+RF");
  EXPECT_EQ(r.variants[3], "PF+PH+RF+KNN+DST");
  ASSERT_EQ(r.conditions.size(), 3u);
  EXPECT_EQ(r.conditions[0], "clean");
  for (const auto& per_variant : r.rmse) {
    ASSERT_EQ(per_variant.size(), 3u);
    for (const auto& per_cond : per_variant) {
      ASSERT_EQ(per_cond.size(), 2u);
      for (double v : per_cond) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0);
      }
    }
  }
  EXPECT_EQ(r.canonical_errors.size(), 4u);
  EXPECT_EQ(r.ci.size(), 4u);
  EXPECT_FALSE(r.comparisons.empty());
  for (const auto& c : r.comparisons) {
    EXPECT_EQ(c.baseline, "PF+RF");
    // Two repeats are too few for the split-level Wilcoxon test.
    EXPECT_TRUE(c.wilcoxon_splits.degenerate);
    EXPECT_GE(c.holm_samples, c.wilcoxon_samples.p_value);
  }
  EXPECT_NO_THROW(r.variant_index("PF+PH+RF"));
  EXPECT_THROW(r.variant_index("nope"), Error);
}

TEST(Ladder, DeterministicAndThreadIndependent) {
  const RadioMap map = synth_radio_map(fixture::small_spec());
  LadderConfig cfg = small_ladder();
  cfg.threads = 1;
  const EvalReport a = run_ablation_ladder(std::span<const RadioMap>(&map, 1), cfg);
  cfg.threads = 2;
  const EvalReport b = run_ablation_ladder(std::span<const RadioMap>(&map, 1), cfg);
  EXPECT_EQ(a.rmse, b.rmse);
  EXPECT_EQ(a.canonical_errors, b.canonical_errors);
}

TEST(Ladder, ReportsWritten) {
  const RadioMap map = synth_radio_map(fixture::small_spec());
  LadderConfig cfg = small_ladder();
  cfg.noise = {NoiseSpec{}};
  cfg.repeats = 1;
  const EvalReport r = run_ablation_ladder(std::span<const RadioMap>(&map, 1), cfg);
  const auto dir = std::filesystem::temp_directory_path() / "fpfuse_test_report";
  std::filesystem::create_directories(dir);
  write_report_csv(r, dir / "r.csv");
  std::ifstream in(dir / "r.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "variant,condition,split,rmse");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4u * 2u);
  const std::string table = format_ci_table(r, 0);
  EXPECT_NE(table.find("PF+RF"), std::string::npos);
  EXPECT_NE(table.find("+-"), std::string::npos);
  std::filesystem::remove_all(dir);
}
