#include "fpfuse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpfuse/error.hpp"
#include "fpfuse/stats.hpp"

namespace fpfuse {

void PipelineConfig::set_seed(std::uint64_t seed) {
  rf.seed = seed;
  pf.seed = seed;
}

Frontend Frontend::fit(const RadioMap& train, const PipelineConfig& config) {
  require(!train.empty(), ErrorKind::Precondition, "training map is empty");
  Frontend fe;
  const Matrix raw = rss_matrix(train);
  fe.norm = fit_norm_stats(raw, config.norm_mode);
  fe.channel_var = fit_channel_variances(apply_norm(raw, fe.norm));
  fe.sigma_dbm.resize(raw.cols());
  for (std::size_t c = 0; c < raw.cols(); ++c) {
    const auto col = raw.column(c);
    fe.sigma_dbm[c] = col.size() >= 2 ? sample_stddev(col) : 0.0;
  }
  fe.filter.method = config.filter_method;
  fe.filter.q_gamma = config.q_gamma;
  fe.filter.r = fe.channel_var.var;
  fe.filter.pf = config.pf;
  fe.filter.validate();
  return fe;
}

Matrix Frontend::process(const RadioMap& map, const NoiseSpec* noise, std::uint64_t noise_stream) const {
  require(map.dim() == norm.dim(), ErrorKind::Dimension,
          "map has " + std::to_string(map.dim()) + " channels, pipeline expects " + std::to_string(norm.dim()));
  Matrix raw = rss_matrix(map);
  auto perturb = [&](Matrix& m, std::span<const double> sigma) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      Rng rng(derive_seed(noise->seed, {noise_stream, i}));
      const auto noisy = inject(*noise, m.row(i), sigma, rng);
      std::copy(noisy.begin(), noisy.end(), m.row(i).begin());
    }
  };
  if (noise && noise->applies_to_raw()) perturb(raw, sigma_dbm);
  Matrix z = apply_norm(raw, norm);
  if (noise && !noise->applies_to_raw()) {
    const auto sd = channel_var.stddev();
    perturb(z, sd);
  }
  const auto segments = rp_segments(map);
  return filter_segments(z, segments, filter);
}

Frontend Frontend::with_filter(FilterMethod method, double q_gamma, const PfParams& pf) const {
  Frontend fe = *this;
  fe.filter.method = method;
  fe.filter.q_gamma = q_gamma;
  fe.filter.pf = pf;
  fe.filter.validate();
  return fe;
}

namespace {

struct DstCandidate {
  double alpha = 0.0;
  double h = 0.0;
  PointRule rule = PointRule::Centroid;
  double rmse = std::numeric_limits<double>::infinity();
};

// Validation RMSE of both DST point rules for one (alpha, h); infinite when
// any sample hits total conflict.
std::pair<double, double> dst_rmse(std::span<const Position> rf, std::span<const Position> knn,
                                   std::span<const Position> truth, const GridSpec& grid, double alpha,
                                   double theta_discount) {
  double se_centroid = 0.0, se_fused = 0.0;
  try {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const Bba fused = dempster_combine(bba_from_point(rf[i], grid, alpha, theta_discount),
                                         bba_from_point(knn[i], grid, alpha, theta_discount));
      const double dc = distance(argmax_belief(fused, grid).centroid, truth[i]);
      const double df = distance(belief_mean(fused, grid), truth[i]);
      se_centroid += dc * dc;
      se_fused += df * df;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Conflict) throw;
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  const double n = static_cast<double>(truth.size());
  return {std::sqrt(se_centroid / n), std::sqrt(se_fused / n)};
}

}  // namespace

Backend Backend::fit(const Matrix& train, std::span<const Position> train_y, const Matrix& val,
                     std::span<const Position> val_y, const Bounds& bounds, const PipelineConfig& config) {
  require(train.rows() == train_y.size() && val.rows() == val_y.size(), ErrorKind::Dimension,
          "feature and label counts differ");
  require(val.rows() >= 2, ErrorKind::Precondition, "validation set needs at least two samples");
  require(!config.alpha_grid.empty() && !config.h_grid.empty(), ErrorKind::Precondition,
          "DST alpha and h grids must be non-empty");

  Backend be;
  be.use_ph = config.use_ph;
  be.k = config.k;
  be.knn_eps = config.knn_eps;

  Matrix x_train = train;
  if (be.use_ph) {
    const auto feats = ph_features_rows(train);
    be.ph_stats = fit_ph_stats(feats);
    x_train = augment_matrix(train, feats, be.ph_stats);
  }
  be.rf = train_rf(x_train, train_y, config.rf);
  be.knn = build_knn_index(x_train, train_y, fit_channel_variances(x_train));

  const Matrix x_val = be.features(val);
  std::vector<Position> rf_val(val.rows()), knn_val(val.rows());
  for (std::size_t i = 0; i < val.rows(); ++i) {
    rf_val[i] = be.rf.predict(x_val.row(i));
    knn_val[i] = predict_wknn(be.knn, x_val.row(i), be.k, be.knn_eps);
  }

  DstCandidate best;
  for (double h : config.h_grid) {
    const GridSpec grid = make_grid(bounds, h);
    for (double alpha : config.alpha_grid) {
      const auto [centroid, fused] = dst_rmse(rf_val, knn_val, val_y, grid, alpha, config.theta_discount);
      if (config.point_rule != PointRule::FusedRegression && centroid < best.rmse)
        best = {alpha, h, PointRule::Centroid, centroid};
      if (config.point_rule != PointRule::Centroid && fused < best.rmse)
        best = {alpha, h, PointRule::FusedRegression, fused};
    }
  }
  if (!std::isfinite(best.rmse))
    fail(ErrorKind::Conflict, "every DST candidate hit total conflict on the validation set");

  be.grid = make_grid(bounds, best.h);
  be.fusion.alpha = best.alpha;
  be.fusion.h = best.h;
  be.fusion.theta_discount = config.theta_discount;
  be.fusion.rule = best.rule;

  std::vector<double> dmin;
  dmin.reserve(2 * val.rows());
  for (std::size_t i = 0; i < val.rows(); ++i) {
    dmin.push_back(nearest_centroid_distance(rf_val[i], be.grid));
    dmin.push_back(nearest_centroid_distance(knn_val[i], be.grid));
  }
  const double med = median(dmin);
  be.fusion.beta = med > 0.0 ? 1.0 / med : 1.0;

  // Choquet targets: how close the fused DST point lands, on the same
  // exponential scale as the source confidences.
  std::vector<double> s1(val.rows()), s2(val.rows()), target(val.rows());
  for (std::size_t i = 0; i < val.rows(); ++i) {
    s1[i] = confidence(rf_val[i], be.grid, be.fusion.beta);
    s2[i] = confidence(knn_val[i], be.grid, be.fusion.beta);
    const Bba fused = dempster_combine(bba_from_point(rf_val[i], be.grid, be.fusion.alpha, be.fusion.theta_discount),
                                       bba_from_point(knn_val[i], be.grid, be.fusion.alpha, be.fusion.theta_discount));
    const Position p = best.rule == PointRule::Centroid ? argmax_belief(fused, be.grid).centroid
                                                        : belief_mean(fused, be.grid);
    target[i] = std::exp(-be.fusion.beta * distance(p, val_y[i]));
  }
  be.fusion.measure = fit_choquet_measure(s1, s2, target);
  return be;
}

std::vector<double> Backend::features(std::span<const double> filtered) const {
  if (!use_ph) return {filtered.begin(), filtered.end()};
  return augment(filtered, fingerprint_ph_features(filtered), ph_stats);
}

Matrix Backend::features(const Matrix& filtered) const {
  if (!use_ph) return filtered;
  return augment_matrix(filtered, ph_features_rows(filtered), ph_stats);
}

SamplePrediction Backend::predict_features(std::span<const double> x) const {
  require(x.size() == knn.dim(), ErrorKind::Dimension, "feature vector has the wrong length");
  SamplePrediction p;
  p.rf = rf.predict(x);
  p.knn = predict_wknn(knn, x, k, knn_eps);
  const Bba fused = fused_belief(p);
  const CellEstimate top = argmax_belief(fused, grid);
  p.cell = top.cell;
  p.dst_centroid = top.centroid;
  p.dst_fused = belief_mean(fused, grid);
  p.s_rf = confidence(p.rf, grid, fusion.beta);
  p.s_knn = confidence(p.knn, grid, fusion.beta);
  p.choquet = choquet(p.s_rf, p.s_knn, fusion.measure);
  p.choquet_lambda = choquet_blend_weight(p.s_rf, p.s_knn, fusion.measure);
  return p;
}

std::vector<SamplePrediction> Backend::predict_all(const Matrix& filtered) const {
  const Matrix x = features(filtered);
  std::vector<SamplePrediction> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict_features(x.row(i)));
  return out;
}

Bba Backend::fused_belief(const SamplePrediction& p) const {
  return dempster_combine(bba_from_point(p.rf, grid, fusion.alpha, fusion.theta_discount),
                          bba_from_point(p.knn, grid, fusion.alpha, fusion.theta_discount));
}

Position Backend::point(const SamplePrediction& p, FusionMode mode, double lambda) const {
  switch (mode) {
    case FusionMode::Dst: return p.dst(fusion.rule);
    case FusionMode::Choquet: return convex_combo(p.rf, p.knn, p.choquet_lambda);
    case FusionMode::Convex: return convex_combo(p.rf, p.knn, lambda);
  }
  return p.dst(fusion.rule);
}

Pipeline Pipeline::fit(const RadioMap& train, const RadioMap& val, const PipelineConfig& config) {
  require(train.dim() == val.dim(), ErrorKind::Dimension, "train and validation channel counts differ");
  Pipeline pl;
  pl.config = config;
  pl.meta = train.meta;
  pl.bounds = train.bounds;
  pl.frontend = Frontend::fit(train, config);
  const Matrix x_train = pl.frontend.process(train);
  const Matrix x_val = pl.frontend.process(val);
  pl.backend = Backend::fit(x_train, train.positions(), x_val, val.positions(), pl.bounds, config);
  return pl;
}

Pipeline Pipeline::fit(const RadioMap& data, const SplitSpec& split, const PipelineConfig& config) {
  const SplitResult parts = stratified_split(data, split);
  Pipeline pl = fit(parts.train, parts.val, config);
  pl.split = split;
  pl.bounds = data.bounds;
  pl.meta = data.meta;
  return pl;
}

namespace {

void check_scan(std::span<const double> raw, std::size_t dim) {
  require(raw.size() == dim, ErrorKind::Dimension,
          "scan has " + std::to_string(raw.size()) + " values, pipeline expects " + std::to_string(dim));
  for (double v : raw) require(std::isfinite(v), ErrorKind::Precondition, "scan contains a non-finite value");
}

}  // namespace

Prediction Pipeline::predict(std::span<const double> raw_dbm) const {
  return predict(raw_dbm, config.fusion, config.lambda);
}

Prediction Pipeline::predict(std::span<const double> raw_dbm, FusionMode mode, double lambda) const {
  Stream s(*this);
  return s.push(raw_dbm, mode, lambda);
}

Pipeline::Stream::Stream(const Pipeline& pipeline) : pipeline_(&pipeline) { reset(); }

void Pipeline::Stream::reset() {
  const auto& filter = pipeline_->frontend.filter;
  filters_.clear();
  filters_.reserve(pipeline_->dim());
  for (std::size_t c = 0; c < pipeline_->dim(); ++c)
    filters_.emplace_back(filter, c, derive_seed(filter.pf.seed, {0u, c}));
}

Prediction Pipeline::Stream::push(std::span<const double> raw_dbm) {
  return push(raw_dbm, pipeline_->config.fusion, pipeline_->config.lambda);
}

Prediction Pipeline::Stream::push(std::span<const double> raw_dbm, FusionMode mode, double lambda) {
  const Pipeline& pl = *pipeline_;
  check_scan(raw_dbm, pl.dim());
  std::vector<double> z = apply_norm(raw_dbm, pl.frontend.norm);
  for (std::size_t c = 0; c < z.size(); ++c) z[c] = filters_[c].update(z[c]);
  Prediction out;
  out.detail = pl.backend.predict(z);
  out.position = pl.backend.point(out.detail, mode, lambda);
  return out;
}

}  // namespace fpfuse
