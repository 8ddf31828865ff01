#pragma once

#include <span>
#include <vector>

#include "fpfuse/matrix.hpp"

namespace fpfuse {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;

  double persistence() const { return death - birth; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

// Finite pairs only. h0 holds the n-1 minimum-spanning-tree bars; h1 omits
// zero-persistence pairs. Both sorted by (birth, death).
struct PersistenceDiagram {
  std::vector<PersistencePair> h0;
  std::vector<PersistencePair> h1;
};

struct PhFeatures {
  double nop0 = 0.0;
  double pe0 = 0.0;
  double nop1 = 0.0;
  double pe1 = 0.0;
};

inline constexpr std::size_t kMaxCloudSize = 64;
inline constexpr std::size_t kPhFeatureCount = 4;

// {(i, f_i)} with 1-based i.
std::vector<Point2> embed_curve(std::span<const double> f_norm);

// Vietoris-Rips persistence in dimensions 0 and 1 over Z/2, filtration capped
// at the enclosing radius.
PersistenceDiagram vr_persistence(std::span<const Point2> cloud);

// Natural-log persistence entropy per dimension.
double persistence_entropy(std::span<const PersistencePair> pairs);
PhFeatures ph_features(const PersistenceDiagram& diagram);

PhFeatures fingerprint_ph_features(std::span<const double> f_norm);

// Z-score statistics of the four PH scalars, fit on training features.
struct PhFeatureStats {
  std::vector<double> mu;
  std::vector<double> sigma;
};

PhFeatureStats fit_ph_stats(std::span<const PhFeatures> train);

std::vector<double> augment(std::span<const double> f_norm, const PhFeatures& feats, const PhFeatureStats& stats);

// Appends z-scored PH columns to every row.
Matrix augment_matrix(const Matrix& normalized, std::span<const PhFeatures> feats, const PhFeatureStats& stats);

std::vector<PhFeatures> ph_features_rows(const Matrix& normalized);

}  // namespace fpfuse
