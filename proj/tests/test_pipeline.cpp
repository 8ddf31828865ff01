#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "fpfuse/artifact.hpp"
#include "fpfuse/error.hpp"

using namespace fpfuse;

namespace {

struct Fitted {
  RadioMap map;
  Pipeline pipeline;
};

const Fitted& fitted() {
  static const Fitted f = [] {
    Fitted out;
    out.map = synth_radio_map(fixture::small_spec(4));
    out.pipeline = Pipeline::fit(out.map, SplitSpec{}, fixture::fast_config());
    return out;
  }();
  return f;
}

std::vector<std::vector<double>> probes(std::size_t n, std::size_t d) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-95.0, -30.0);
  std::vector<std::vector<double>> out(n, std::vector<double>(d));
  for (auto& p : out)
    for (auto& v : p) v = u(gen);
  return out;
}

std::filesystem::path temp_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Pipeline, FittedStateIsSane) {
  const Pipeline& p = fitted().pipeline;
  EXPECT_EQ(p.dim(), 10u);
  EXPECT_TRUE(p.backend.use_ph);
  EXPECT_GT(p.backend.fusion.beta, 0.0);
  EXPECT_NE(p.backend.fusion.rule, PointRule::Auto);
  EXPECT_EQ(p.backend.rf.trees.size(), 20u);
  EXPECT_EQ(p.backend.rf.n_features, 14u);
  for (double r : p.frontend.filter.r) EXPECT_GT(r, 0.0);
}

TEST(Pipeline, ArtifactRoundTripIsBitExact) {
  const Pipeline& p = fitted().pipeline;
  const auto dir = temp_dir("fpfuse_test_artifact");
  save_pipeline(p, dir / "a.json");
  EXPECT_FALSE(std::filesystem::exists(dir / "a.json.tmp"));
  const Pipeline q = load_pipeline(dir / "a.json");
  for (const auto& scan : probes(100, p.dim())) {
    for (FusionMode mode : {FusionMode::Dst, FusionMode::Choquet, FusionMode::Convex}) {
      const Prediction a = p.predict(scan, mode, 0.3);
      const Prediction b = q.predict(scan, mode, 0.3);
      EXPECT_EQ(a.position, b.position);
      EXPECT_EQ(a.detail.cell, b.detail.cell);
      EXPECT_EQ(a.detail.choquet, b.detail.choquet);
    }
  }
  EXPECT_EQ(dump_json(pipeline_to_json(p)), dump_json(pipeline_to_json(q)));
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, VersionMismatchRejected) {
  Json j = pipeline_to_json(fitted().pipeline);
  j["version"] = "fpfuse-artifact/0";
  try {
    pipeline_from_json(j);
    FAIL() << "expected a version error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Version);
  }
}

TEST(Pipeline, CorruptArtifactIsParseError) {
  const auto dir = temp_dir("fpfuse_test_corrupt");
  std::ofstream(dir / "bad.json") << "{ not json";
  try {
    load_pipeline(dir / "bad.json");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
  }
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, StreamingMatchesBatchFilter) {
  const Pipeline& p = fitted().pipeline;
  const auto scans = probes(25, p.dim());
  Matrix raw(scans.size(), p.dim());
  for (std::size_t r = 0; r < scans.size(); ++r) std::copy(scans[r].begin(), scans[r].end(), raw.row(r).begin());
  const Matrix filtered = filter_stream(apply_norm(raw, p.frontend.norm), p.frontend.filter, 0);
  auto stream = p.stream();
  for (std::size_t r = 0; r < scans.size(); ++r) {
    const Prediction s = stream.push(scans[r]);
    const SamplePrediction b = p.backend.predict(filtered.row(r));
    EXPECT_EQ(s.detail.rf, b.rf);
    EXPECT_EQ(s.detail.knn, b.knn);
    EXPECT_EQ(s.position, p.backend.point(b, p.config.fusion, p.config.lambda));
  }
  stream.reset();
  EXPECT_EQ(stream.push(scans[0]).position, p.predict(scans[0]).position);
}

TEST(Pipeline, ConvexEndpointsAreRegressors) {
  const Pipeline& p = fitted().pipeline;
  for (const auto& scan : probes(20, p.dim())) {
    const Prediction rf = p.predict(scan, FusionMode::Convex, 1.0);
    EXPECT_EQ(rf.position, rf.detail.rf);
    const Prediction knn = p.predict(scan, FusionMode::Convex, 0.0);
    EXPECT_EQ(knn.position, knn.detail.knn);
  }
}

TEST(Pipeline, BeliefOnSimplexAndPointInBounds) {
  const Pipeline& p = fitted().pipeline;
  for (const auto& scan : probes(20, p.dim())) {
    const Prediction pred = p.predict(scan);
    const Bba m = p.belief(pred);
    EXPECT_NEAR(m.total(), 1.0, 1e-9);
    EXPECT_TRUE(p.bounds.contains(pred.detail.dst_centroid));
    EXPECT_GE(pred.detail.s_rf, 0.0);
    EXPECT_LE(pred.detail.s_rf, 1.0);
    EXPECT_GE(pred.detail.choquet, std::min(pred.detail.s_rf, pred.detail.s_knn) - 1e-12);
    EXPECT_LE(pred.detail.choquet, std::max(pred.detail.s_rf, pred.detail.s_knn) + 1e-12);
  }
}

TEST(Pipeline, ScanValidation) {
  const Pipeline& p = fitted().pipeline;
  EXPECT_THROW(p.predict(std::vector<double>(p.dim() + 1, -60.0)), Error);
  std::vector<double> nan_scan(p.dim(), -60.0);
  nan_scan[2] = std::nan("");
  EXPECT_THROW(p.predict(nan_scan), Error);
}

TEST(Pipeline, FitIsDeterministic) {
  const auto& f = fitted();
  const Pipeline again = Pipeline::fit(f.map, SplitSpec{}, fixture::fast_config());
  EXPECT_EQ(dump_json(pipeline_to_json(again)), dump_json(pipeline_to_json(f.pipeline)));
}

TEST(Pipeline, LearnsCleanMap) {
  const auto& f = fitted();
  const SplitResult s = stratified_split(f.map, SplitSpec{});
  const Matrix test = f.pipeline.frontend.process(s.test);
  double sq = 0.0;
  for (std::size_t r = 0; r < test.rows(); ++r) {
    const Position p = f.pipeline.backend.point(f.pipeline.backend.predict(test.row(r)), FusionMode::Dst, 0.5);
    const double d = distance(p, s.test.samples[r].position);
    sq += d * d;
  }
  // Eight RPs on a 6 x 14 m floor; chance level is several meters.
  EXPECT_LT(std::sqrt(sq / static_cast<double>(test.rows())), 1.0);
}

TEST(RunConfig, SeedsAndUnknownKeys) {
  const RunConfig c = run_config_from_json(Json::parse(R"({"synth": {}, "seed": 9, "split": {"seed": 4}})"));
  EXPECT_EQ(c.split.seed, 4u);
  EXPECT_EQ(c.pipeline.rf.seed, 9u);
  EXPECT_EQ(c.pipeline.pf.seed, 9u);
  try {
    run_config_from_json(Json::parse(R"({"synth": {}, "pipeline": {"k": 5, "bogus": 1}})"));
    FAIL() << "expected a schema error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Schema);
  }
  const PipelineConfig pc = pipeline_config_from_json(pipeline_config_to_json(fixture::fast_config()));
  EXPECT_EQ(pipeline_config_to_json(pc), pipeline_config_to_json(fixture::fast_config()));
}
