#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fpfuse/matrix.hpp"
#include "fpfuse/types.hpp"

namespace fpfuse {

enum class NormMode { DbmZscore, MwZscore };

inline constexpr double kSigmaFloor = 1e-9;
inline constexpr double kVarianceShrinkage = 1e-6;

// Training-set z-score statistics. In MwZscore mode mu/sigma live in linear
// milliwatt space.
struct NormStats {
  NormMode mode = NormMode::DbmZscore;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<bool> floored;  // sigma replaced by kSigmaFloor

  std::size_t dim() const { return mu.size(); }
};

struct ChannelVariances {
  std::vector<double> var;
  double shrinkage = kVarianceShrinkage;

  std::size_t dim() const { return var.size(); }
  std::vector<double> stddev() const;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

NormStats fit_norm_stats(const RadioMap& train, NormMode mode);
NormStats fit_norm_stats(const Matrix& raw_dbm, NormMode mode);

std::vector<double> apply_norm(std::span<const double> raw_dbm, const NormStats& stats);
Matrix apply_norm(const Matrix& raw_dbm, const NormStats& stats);

// Unbiased column variances plus shrinkage. Needs at least two rows.
ChannelVariances fit_channel_variances(const Matrix& train_normalized,
                                       double shrinkage = kVarianceShrinkage);

Matrix rss_matrix(const RadioMap& map);

}  // namespace fpfuse
