#include "fpfuse/persistence.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fpfuse/error.hpp"

namespace fpfuse {
namespace {

double edge_length(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct Edge {
  double length;
  std::uint32_t i, j;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

bool pair_less(const PersistencePair& a, const PersistencePair& b) {
  return a.birth < b.birth || (a.birth == b.birth && a.death < b.death);
}

}  // namespace

std::vector<Point2> embed_curve(std::span<const double> f_norm) {
  require(f_norm.size() >= 2, ErrorKind::Precondition, "curve embedding needs at least two channels");
  std::vector<Point2> cloud(f_norm.size());
  for (std::size_t i = 0; i < f_norm.size(); ++i) cloud[i] = {static_cast<double>(i + 1), f_norm[i]};
  return cloud;
}

PersistenceDiagram vr_persistence(std::span<const Point2> cloud) {
  const std::size_t n = cloud.size();
  require(n >= 2, ErrorKind::Precondition, "persistence needs at least two points");
  require(n <= kMaxCloudSize, ErrorKind::Precondition,
          "point cloud of " + std::to_string(n) + " exceeds the " + std::to_string(kMaxCloudSize) + "-point limit");

  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  std::vector<double> dist(n * n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const double len = edge_length(cloud[i], cloud[j]);
      dist[i * n + j] = dist[j * n + i] = len;
      edges.push_back({len, i, j});
    }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.length != b.length) return a.length < b.length;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  PersistenceDiagram out;
  UnionFind uf(n);
  for (const auto& e : edges)
    if (uf.unite(e.i, e.j)) out.h0.push_back({0.0, e.length});

  // Nothing survives past the enclosing radius: the complex is a cone there.
  double enclosing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double far = 0.0;
    for (std::size_t j = 0; j < n; ++j) far = std::max(far, dist[i * n + j]);
    enclosing = std::min(enclosing, far);
  }
  std::size_t n_edges = 0;
  while (n_edges < edges.size() && edges[n_edges].length <= enclosing) ++n_edges;
  std::vector<std::int32_t> edge_index(n * n, -1);
  for (std::size_t e = 0; e < n_edges; ++e) {
    edge_index[edges[e].i * n + edges[e].j] = static_cast<std::int32_t>(e);
    edge_index[edges[e].j * n + edges[e].i] = static_cast<std::int32_t>(e);
  }

  struct Triangle {
    double diameter;
    std::array<std::int32_t, 3> faces;  // edge filtration indices, descending
  };
  std::vector<Triangle> triangles;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::int32_t eij = edge_index[i * n + j];
      if (eij < 0) continue;
      for (std::size_t k = j + 1; k < n; ++k) {
        const std::int32_t eik = edge_index[i * n + k];
        const std::int32_t ejk = edge_index[j * n + k];
        if (eik < 0 || ejk < 0) continue;
        std::array<std::int32_t, 3> f{eij, eik, ejk};
        std::sort(f.begin(), f.end(), std::greater<>());
        triangles.push_back({edges[static_cast<std::size_t>(f[0])].length, f});
      }
    }
  std::sort(triangles.begin(), triangles.end(), [](const Triangle& a, const Triangle& b) {
    if (a.diameter != b.diameter) return a.diameter < b.diameter;
    return a.faces < b.faces;
  });

  // Column reduction over Z/2; columns kept as descending index lists.
  std::unordered_map<std::int32_t, std::vector<std::int32_t>> reduced_by_pivot;
  std::vector<std::int32_t> column, scratch;
  for (const auto& t : triangles) {
    column.assign(t.faces.begin(), t.faces.end());
    while (!column.empty()) {
      auto it = reduced_by_pivot.find(column.front());
      if (it == reduced_by_pivot.end()) break;
      scratch.clear();
      std::set_symmetric_difference(column.begin(), column.end(), it->second.begin(), it->second.end(),
                                    std::back_inserter(scratch), std::greater<>());
      column.swap(scratch);
    }
    if (column.empty()) continue;
    const std::int32_t pivot = column.front();
    const double birth = edges[static_cast<std::size_t>(pivot)].length;
    if (t.diameter > birth) out.h1.push_back({birth, t.diameter});
    reduced_by_pivot.emplace(pivot, column);
  }

  std::sort(out.h0.begin(), out.h0.end(), pair_less);
  std::sort(out.h1.begin(), out.h1.end(), pair_less);
  return out;
}

double persistence_entropy(std::span<const PersistencePair> pairs) {
  double total = 0.0;
  std::size_t positive = 0;
  for (const auto& p : pairs) {
    if (p.persistence() > 0.0) {
      total += p.persistence();
      ++positive;
    }
  }
  if (positive <= 1 || !(total > 0.0)) return 0.0;
  double h = 0.0;
  for (const auto& p : pairs) {
    if (p.persistence() <= 0.0) continue;
    const double l = p.persistence() / total;
    h -= l * std::log(l);
  }
  return h;
}

PhFeatures ph_features(const PersistenceDiagram& diagram) {
  return {static_cast<double>(diagram.h0.size()), persistence_entropy(diagram.h0),
          static_cast<double>(diagram.h1.size()), persistence_entropy(diagram.h1)};
}

PhFeatures fingerprint_ph_features(std::span<const double> f_norm) {
  const auto cloud = embed_curve(f_norm);
  return ph_features(vr_persistence(cloud));
}

namespace {
std::array<double, kPhFeatureCount> as_array(const PhFeatures& f) { return {f.nop0, f.pe0, f.nop1, f.pe1}; }
}  // namespace

PhFeatureStats fit_ph_stats(std::span<const PhFeatures> train) {
  require(!train.empty(), ErrorKind::Precondition, "PH statistics need at least one training sample");
  PhFeatureStats stats;
  stats.mu.assign(kPhFeatureCount, 0.0);
  stats.sigma.assign(kPhFeatureCount, 0.0);
  const double n = static_cast<double>(train.size());
  for (const auto& f : train) {
    const auto a = as_array(f);
    for (std::size_t c = 0; c < kPhFeatureCount; ++c) stats.mu[c] += a[c];
  }
  for (auto& m : stats.mu) m /= n;
  for (const auto& f : train) {
    const auto a = as_array(f);
    for (std::size_t c = 0; c < kPhFeatureCount; ++c) stats.sigma[c] += (a[c] - stats.mu[c]) * (a[c] - stats.mu[c]);
  }
  // Constant PH columns (NoP0 is always d-1) are centered but not rescaled.
  for (auto& s : stats.sigma) {
    s = std::sqrt(s / n);
    if (s < 1e-9) s = 1.0;
  }
  return stats;
}

std::vector<double> augment(std::span<const double> f_norm, const PhFeatures& feats, const PhFeatureStats& stats) {
  require(stats.mu.size() == kPhFeatureCount && stats.sigma.size() == kPhFeatureCount, ErrorKind::Dimension,
          "PH statistics must cover four features");
  std::vector<double> out(f_norm.begin(), f_norm.end());
  const auto a = as_array(feats);
  for (std::size_t c = 0; c < kPhFeatureCount; ++c) out.push_back((a[c] - stats.mu[c]) / stats.sigma[c]);
  return out;
}

std::vector<PhFeatures> ph_features_rows(const Matrix& normalized) {
  std::vector<PhFeatures> out;
  out.reserve(normalized.rows());
  for (std::size_t r = 0; r < normalized.rows(); ++r) out.push_back(fingerprint_ph_features(normalized.row(r)));
  return out;
}

Matrix augment_matrix(const Matrix& normalized, std::span<const PhFeatures> feats, const PhFeatureStats& stats) {
  require(feats.size() == normalized.rows(), ErrorKind::Dimension, "one PH feature set per row required");
  Matrix out(normalized.rows(), normalized.cols() + kPhFeatureCount);
  for (std::size_t r = 0; r < normalized.rows(); ++r) {
    const auto row = augment(normalized.row(r), feats[r], stats);
    std::copy(row.begin(), row.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace fpfuse
