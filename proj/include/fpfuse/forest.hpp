#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fpfuse/matrix.hpp"
#include "fpfuse/types.hpp"

namespace fpfuse {

struct RfConfig {
  std::size_t n_trees = 200;
  std::size_t max_depth = 28;  // 0 = unlimited, stop on leaf purity
  std::size_t min_leaf = 1;
  std::size_t max_features = 0;  // 0 = ceil(sqrt(D))
  std::uint64_t seed = 123;
  std::size_t threads = 1;
};

// Leaf purity threshold used when depth is unlimited.
inline constexpr double kLeafPurity = 1e-12;

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  Position value;             // mean label of the node's samples
  std::uint32_t count = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  Position predict(std::span<const double> x) const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

// Multi-target bagged CART forest predicting (x, y).
struct RfModel {
  std::vector<RegressionTree> trees;
  RfConfig config;
  std::size_t n_features = 0;

  // Uses the first `n_trees` trees when n_trees > 0 (for latency scaling).
  Position predict(std::span<const double> x, std::size_t n_trees = 0) const;
};

RfModel train_rf(const Matrix& X, std::span<const Position> Y, const RfConfig& config);

inline Position predict_rf(const RfModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace fpfuse
