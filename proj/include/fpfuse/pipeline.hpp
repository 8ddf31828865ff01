#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpfuse/dataset.hpp"
#include "fpfuse/evidence.hpp"
#include "fpfuse/filters.hpp"
#include "fpfuse/forest.hpp"
#include "fpfuse/knn.hpp"
#include "fpfuse/noise.hpp"
#include "fpfuse/normalize.hpp"
#include "fpfuse/persistence.hpp"

namespace fpfuse {

enum class FusionMode { Dst, Choquet, Convex };

// How the DST stage turns the fused belief into a point: the centroid of the
// top cell, the mass-weighted centroid mean, or whichever of the two has the
// lower validation RMSE.
enum class PointRule { Centroid, FusedRegression, Auto };

struct PipelineConfig {
  NormMode norm_mode = NormMode::DbmZscore;

  FilterMethod filter_method = FilterMethod::Pf;
  double q_gamma = 0.5;
  PfParams pf;

  bool use_ph = true;

  RfConfig rf{.n_trees = 200, .max_depth = 28};
  std::size_t k = 7;
  double knn_eps = kDefaultKnnEps;

  std::vector<double> alpha_grid{0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> h_grid{0.5, 0.75, 1.0};
  double theta_discount = 0.05;
  PointRule point_rule = PointRule::Auto;

  FusionMode fusion = FusionMode::Dst;
  double lambda = 0.5;

  // Sets the RF and PF base seeds.
  void set_seed(std::uint64_t seed);
};

// Offline statistics ahead of the regressors: normalization, metric
// variances, and the calibrated per-channel filter.
struct Frontend {
  NormStats norm;
  ChannelVariances channel_var;     // normalized space, d channels
  std::vector<double> sigma_dbm;    // training std per channel in dBm
  FilterConfig filter;

  static Frontend fit(const RadioMap& train, const PipelineConfig& config);

  // raw -> [raw noise] -> normalize -> [normalized noise] -> filter, each run
  // of equal rp_id filtered as one stream. The input map is never modified.
  Matrix process(const RadioMap& map, const NoiseSpec* noise = nullptr, std::uint64_t noise_stream = 0) const;

  // Copy with a different filter method, keeping calibrated R.
  Frontend with_filter(FilterMethod method, double q_gamma, const PfParams& pf) const;
};

struct FusionParams {
  double alpha = 1.0;
  double h = 1.0;
  double theta_discount = 0.05;
  double beta = 1.0;
  PointRule rule = PointRule::FusedRegression;  // never Auto once fitted
  ChoquetMeasure measure;
};

struct SamplePrediction {
  Position rf;
  Position knn;
  Position dst_centroid;
  Position dst_fused;
  std::size_t cell = 0;
  double s_rf = 0.0;
  double s_knn = 0.0;
  double choquet = 0.0;
  double choquet_lambda = 0.5;

  Position dst(PointRule rule) const { return rule == PointRule::Centroid ? dst_centroid : dst_fused; }
};

// Everything downstream of filtering for one feature space (plain or
// PH-augmented): both regressors and the fusion layer.
struct Backend {
  bool use_ph = false;
  PhFeatureStats ph_stats;
  RfModel rf;
  KnnIndex knn;
  std::size_t k = 7;
  double knn_eps = kDefaultKnnEps;
  GridSpec grid;
  FusionParams fusion;

  // Fits regressors on `train`, then picks (alpha, h, rule) by validation
  // RMSE of the DST point, sets beta, and fits the Choquet measure.
  static Backend fit(const Matrix& train, std::span<const Position> train_y, const Matrix& val,
                     std::span<const Position> val_y, const Bounds& bounds, const PipelineConfig& config);

  std::vector<double> features(std::span<const double> filtered) const;
  Matrix features(const Matrix& filtered) const;

  SamplePrediction predict_features(std::span<const double> x) const;
  SamplePrediction predict(std::span<const double> filtered) const { return predict_features(features(filtered)); }
  std::vector<SamplePrediction> predict_all(const Matrix& filtered) const;

  Bba fused_belief(const SamplePrediction& p) const;
  Position point(const SamplePrediction& p, FusionMode mode, double lambda) const;
};

inline constexpr const char* kArtifactVersion = "fpfuse-artifact/1";

struct Prediction {
  Position position;
  SamplePrediction detail;
};

class Pipeline {
 public:
  PipelineConfig config;
  Frontend frontend;
  Backend backend;
  MapMeta meta;
  Bounds bounds;
  SplitSpec split;

  static Pipeline fit(const RadioMap& train, const RadioMap& val, const PipelineConfig& config);
  static Pipeline fit(const RadioMap& data, const SplitSpec& split, const PipelineConfig& config);

  std::size_t dim() const { return frontend.norm.dim(); }

  // One-shot: fresh filter state for each call.
  Prediction predict(std::span<const double> raw_dbm) const;
  Prediction predict(std::span<const double> raw_dbm, FusionMode mode, double lambda) const;

  Bba belief(const Prediction& p) const { return backend.fused_belief(p.detail); }

  // Streaming prediction keeps per-channel filter state across scans.
  class Stream {
   public:
    explicit Stream(const Pipeline& pipeline);
    Prediction push(std::span<const double> raw_dbm);
    Prediction push(std::span<const double> raw_dbm, FusionMode mode, double lambda);
    void reset();

   private:
    const Pipeline* pipeline_;
    std::vector<ChannelFilter> filters_;
  };

  Stream stream() const { return Stream(*this); }
};

}  // namespace fpfuse
