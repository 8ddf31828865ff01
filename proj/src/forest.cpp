#include "fpfuse/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fpfuse/error.hpp"
#include "fpfuse/parallel.hpp"
#include "fpfuse/rng.hpp"

namespace fpfuse {
namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse = 0.0;
  std::size_t left_count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const Position> Y, const RfConfig& cfg, std::size_t max_features, Rng& rng)
      : X_(X), Y_(Y), cfg_(cfg), max_features_(max_features), rng_(rng) {
    features_.resize(X.cols());
    std::iota(features_.begin(), features_.end(), 0);
  }

  RegressionTree build(std::vector<std::size_t> samples) {
    tree_.nodes.clear();
    samples_ = std::move(samples);
    grow(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto node_id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t n = end - begin;
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = Y_[samples_[i]];
      sx += p.x;
      sy += p.y;
      sxx += p.x * p.x;
      syy += p.y * p.y;
    }
    const double nn = static_cast<double>(n);
    {
      auto& node = tree_.nodes[node_id];
      node.value = {sx / nn, sy / nn};
      node.count = static_cast<std::uint32_t>(n);
    }
    const double sse = std::max(0.0, sxx - sx * sx / nn) + std::max(0.0, syy - sy * sy / nn);
    const bool depth_capped = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
    if (depth_capped || n < 2 * cfg_.min_leaf || sse / nn < kLeafPurity) return node_id;

    const SplitChoice split = best_split(begin, end, sse);
    if (!split.found) return node_id;

    auto mid_it = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                 samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](std::size_t s) { return X_(s, split.feature) <= split.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());
    const std::int32_t left = grow(begin, mid, depth + 1);
    const std::int32_t right = grow(mid, end, depth + 1);
    auto& node = tree_.nodes[node_id];
    node.feature = static_cast<std::int32_t>(split.feature);
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_id;
  }

  // Draws features without replacement until max_features non-constant ones
  // have been evaluated.
  SplitChoice best_split(std::size_t begin, std::size_t end, double parent_sse) {
    SplitChoice best;
    best.sse = parent_sse;
    const std::size_t n = end - begin;
    std::size_t evaluated = 0;
    std::size_t remaining = features_.size();
    std::vector<std::pair<double, std::size_t>> column(n);
    while (evaluated < max_features_ && remaining > 0) {
      std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
      const std::size_t j = pick(rng_);
      std::swap(features_[j], features_[remaining - 1]);
      const std::size_t f = features_[--remaining];

      for (std::size_t i = 0; i < n; ++i) column[i] = {X_(samples_[begin + i], f), samples_[begin + i]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++evaluated;

      double tx = 0.0, ty = 0.0, txx = 0.0, tyy = 0.0;
      for (const auto& [v, s] : column) {
        tx += Y_[s].x;
        ty += Y_[s].y;
        txx += Y_[s].x * Y_[s].x;
        tyy += Y_[s].y * Y_[s].y;
      }
      double lx = 0.0, ly = 0.0, lxx = 0.0, lyy = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto& p = Y_[column[i].second];
        lx += p.x;
        ly += p.y;
        lxx += p.x * p.x;
        lyy += p.y * p.y;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (column[i].first == column[i + 1].first) continue;
        if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        const double dl = static_cast<double>(nl);
        const double dr = static_cast<double>(nr);
        const double rx = tx - lx, ry = ty - ly, rxx = txx - lxx, ryy = tyy - lyy;
        const double sse = (lxx - lx * lx / dl) + (lyy - ly * ly / dl) + (rxx - rx * rx / dr) + (ryy - ry * ry / dr);
        if (sse < best.sse - 1e-12 * std::max(1.0, parent_sse) || (!best.found && sse <= best.sse)) {
          best.found = true;
          best.sse = sse;
          best.feature = f;
          best.left_count = nl;
          const double mid = 0.5 * (column[i].first + column[i + 1].first);
          // Midpoint can round up to the right value for adjacent doubles.
          best.threshold = mid < column[i + 1].first ? mid : column[i].first;
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  std::span<const Position> Y_;
  const RfConfig& cfg_;
  std::size_t max_features_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<std::size_t> samples_;
  RegressionTree tree_;
};

}  // namespace

Position RegressionTree::predict(std::span<const double> x) const {
  std::int32_t id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    id = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[id].value;
}

Position RfModel::predict(std::span<const double> x, std::size_t n_trees) const {
  require(x.size() == n_features, ErrorKind::Dimension,
          "RF expects " + std::to_string(n_features) + " features, got " + std::to_string(x.size()));
  const std::size_t used = n_trees == 0 ? trees.size() : std::min(n_trees, trees.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t t = 0; t < used; ++t) {
    const Position p = trees[t].predict(x);
    sx += p.x;
    sy += p.y;
  }
  return {sx / static_cast<double>(used), sy / static_cast<double>(used)};
}

RfModel train_rf(const Matrix& X, std::span<const Position> Y, const RfConfig& config) {
  require(X.rows() >= 2, ErrorKind::Precondition, "random forest needs at least two samples");
  require(X.rows() == Y.size(), ErrorKind::Dimension, "feature rows and labels differ in length");
  require(config.n_trees >= 1, ErrorKind::Precondition, "random forest needs at least one tree");
  require(config.min_leaf >= 1, ErrorKind::Precondition, "min_leaf must be >= 1");
  RfModel model;
  model.config = config;
  model.n_features = X.cols();
  const std::size_t max_features =
      config.max_features > 0 ? std::min(config.max_features, X.cols())
                               : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(X.cols()))));
  model.trees.resize(config.n_trees);
  const std::size_t m = X.rows();
  parallel_for(config.n_trees, config.threads == 0 ? 1 : config.threads, [&](std::size_t t) {
    Rng rng(derive_seed(config.seed, {t}));
    std::uniform_int_distribution<std::size_t> draw(0, m - 1);
    std::vector<std::size_t> bootstrap(m);
    for (auto& b : bootstrap) b = draw(rng);
    TreeBuilder builder(X, Y, config, max_features, rng);
    model.trees[t] = builder.build(std::move(bootstrap));
  });
  return model;
}

}  // namespace fpfuse
