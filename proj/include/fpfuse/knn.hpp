#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fpfuse/matrix.hpp"
#include "fpfuse/normalize.hpp"
#include "fpfuse/types.hpp"

namespace fpfuse {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;  // squared diagonal-Mahalanobis distance

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Exact k-nearest-neighbor index under a diagonal Mahalanobis metric. Points
// are stored pre-scaled by 1/sigma_i so a Euclidean kd-tree answers the
// Mahalanobis query. Ties are broken by lower training index.
class KnnIndex {
 public:
  KnnIndex() = default;
  KnnIndex(Matrix points, std::vector<Position> labels, ChannelVariances metric);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return raw_.cols(); }
  const Matrix& points() const { return raw_; }
  const std::vector<Position>& labels() const { return labels_; }
  const ChannelVariances& metric() const { return metric_; }

  std::vector<Neighbor> query(std::span<const double> x, std::size_t k) const;

  // Reference linear scan with identical arithmetic; used by tests and bench.
  std::vector<Neighbor> brute_force(std::span<const double> x, std::size_t k) const;

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t dim = 0;
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::size_t begin, std::size_t end);
  void scale_query(std::span<const double> x, std::vector<double>& out) const;
  double scaled_distance(const std::vector<double>& q, std::size_t point) const;

  Matrix raw_;
  Matrix scaled_;
  std::vector<Position> labels_;
  ChannelVariances metric_;
  std::vector<double> inv_sigma_;
  std::vector<std::size_t> order_;  // point indices permuted into leaf buckets
  std::vector<Node> nodes_;
};

inline constexpr double kDefaultKnnEps = 1e-9;

KnnIndex build_knn_index(const Matrix& X, std::span<const Position> Y, const ChannelVariances& metric);

Position predict_wknn(const KnnIndex& index, std::span<const double> x, std::size_t k,
                      double eps = kDefaultKnnEps);

}  // namespace fpfuse
