#include "fpfuse/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "fpfuse/error.hpp"

namespace fpfuse {
namespace {

constexpr std::size_t kLeafSize = 8;

// Heap order: worst neighbor (largest distance, then largest index) on top.
struct WorseFirst {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  }
};

bool better(const Neighbor& a, const Neighbor& b) { return WorseFirst{}(a, b); }

class Collector {
 public:
  explicit Collector(std::size_t k) : k_(k) {}

  void offer(Neighbor n) {
    if (heap_.size() < k_) {
      heap_.push(n);
    } else if (better(n, heap_.top())) {
      heap_.pop();
      heap_.push(n);
    }
  }
  bool full() const { return heap_.size() == k_; }
  double worst() const { return heap_.top().distance; }

  std::vector<Neighbor> sorted() {
    std::vector<Neighbor> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<Neighbor, std::vector<Neighbor>, WorseFirst> heap_;
};

}  // namespace

KnnIndex::KnnIndex(Matrix points, std::vector<Position> labels, ChannelVariances metric)
    : raw_(std::move(points)), labels_(std::move(labels)), metric_(std::move(metric)) {
  require(raw_.rows() == labels_.size(), ErrorKind::Dimension, "kNN points and labels differ in length");
  require(metric_.dim() == raw_.cols(), ErrorKind::Dimension,
          "kNN metric has " + std::to_string(metric_.dim()) + " dims, points have " + std::to_string(raw_.cols()));
  for (double v : metric_.var) require(v > 0.0, ErrorKind::Precondition, "kNN metric variances must be positive");
  inv_sigma_.resize(metric_.dim());
  for (std::size_t i = 0; i < inv_sigma_.size(); ++i) inv_sigma_[i] = 1.0 / std::sqrt(metric_.var[i]);
  scaled_ = Matrix(raw_.rows(), raw_.cols());
  for (std::size_t r = 0; r < raw_.rows(); ++r)
    for (std::size_t c = 0; c < raw_.cols(); ++c) scaled_(r, c) = raw_(r, c) * inv_sigma_[c];
  order_.resize(raw_.rows());
  std::iota(order_.begin(), order_.end(), 0);
  if (!order_.empty()) build(0, order_.size());
}

std::int32_t KnnIndex::build(std::size_t begin, std::size_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  std::size_t best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t c = 0; c < scaled_.cols(); ++c) {
    double lo = scaled_(order_[begin], c), hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = std::min(lo, scaled_(order_[i], c));
      hi = std::max(hi, scaled_(order_[i], c));
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = c;
    }
  }
  if (best_spread <= 0.0) return id;  // all points identical: keep as leaf

  const std::size_t mid = begin + (end - begin) / 2;
  auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
  std::nth_element(first, order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return scaled_(a, best_dim) < scaled_(b, best_dim); });
  const double split = scaled_(order_[mid], best_dim);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].dim = best_dim;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KnnIndex::scale_query(std::span<const double> x, std::vector<double>& out) const {
  require(x.size() == dim(), ErrorKind::Dimension,
          "query has " + std::to_string(x.size()) + " dims, index has " + std::to_string(dim()));
  out.resize(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = x[c] * inv_sigma_[c];
}

double KnnIndex::scaled_distance(const std::vector<double>& q, std::size_t point) const {
  const auto row = scaled_.row(point);
  double acc = 0.0;
  for (std::size_t c = 0; c < q.size(); ++c) {
    const double d = q[c] - row[c];
    acc += d * d;
  }
  return acc;
}

std::vector<Neighbor> KnnIndex::query(std::span<const double> x, std::size_t k) const {
  require(k >= 1 && k <= size(), ErrorKind::Precondition,
          "k=" + std::to_string(k) + " must be in [1, " + std::to_string(size()) + "]");
  std::vector<double> q;
  scale_query(x, q);
  Collector best(k);

  // Depth-first descent, nearer child first. Subtrees are pruned only when
  // strictly farther than the current k-th distance so ties still resolve by
  // index.
  struct Frame {
    std::int32_t node;
    double bound;
  };
  std::vector<Frame> stack{{0, 0.0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (best.full() && f.bound > best.worst()) continue;
    const Node& node = nodes_[f.node];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) best.offer({order_[i], scaled_distance(q, order_[i])});
      continue;
    }
    const double diff = q[node.dim] - node.split;
    const double plane = diff * diff;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    stack.push_back({far, std::max(f.bound, plane)});
    stack.push_back({near, f.bound});
  }
  return best.sorted();
}

std::vector<Neighbor> KnnIndex::brute_force(std::span<const double> x, std::size_t k) const {
  require(k >= 1 && k <= size(), ErrorKind::Precondition, "k out of range");
  std::vector<double> q;
  scale_query(x, q);
  Collector best(k);
  for (std::size_t i = 0; i < size(); ++i) best.offer({i, scaled_distance(q, i)});
  return best.sorted();
}

KnnIndex build_knn_index(const Matrix& X, std::span<const Position> Y, const ChannelVariances& metric) {
  return KnnIndex(X, std::vector<Position>(Y.begin(), Y.end()), metric);
}

Position predict_wknn(const KnnIndex& index, std::span<const double> x, std::size_t k, double eps) {
  require(eps > 0.0, ErrorKind::Precondition, "wKNN epsilon must be positive");
  const auto neighbors = index.query(x, k);
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& n : neighbors) {
    const double w = 1.0 / (n.distance + eps);
    const Position& p = index.labels()[n.index];
    sw += w;
    sx += w * p.x;
    sy += w * p.y;
  }
  return {sx / sw, sy / sw};
}

}  // namespace fpfuse
