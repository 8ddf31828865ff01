#include "fpfuse/normalize.hpp"

#include <cmath>

#include "fpfuse/error.hpp"

namespace fpfuse {

Matrix rss_matrix(const RadioMap& map) {
  Matrix m(map.size(), map.dim());
  for (std::size_t r = 0; r < map.size(); ++r) {
    const auto& rss = map.samples[r].fingerprint.rss;
    require(rss.size() == map.dim(), ErrorKind::Dimension, "fingerprint width differs from map dimension");
    for (std::size_t c = 0; c < rss.size(); ++c) m(r, c) = rss[c];
  }
  return m;
}

NormStats fit_norm_stats(const RadioMap& train, NormMode mode) { return fit_norm_stats(rss_matrix(train), mode); }

NormStats fit_norm_stats(const Matrix& raw_dbm, NormMode mode) {
  require(!raw_dbm.empty(), ErrorKind::Precondition, "cannot fit normalization on an empty training set");
  const std::size_t n = raw_dbm.rows();
  const std::size_t d = raw_dbm.cols();
  NormStats stats;
  stats.mode = mode;
  stats.mu.assign(d, 0.0);
  stats.sigma.assign(d, 0.0);
  stats.floored.assign(d, false);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = mode == NormMode::MwZscore ? dbm_to_mw(raw_dbm(r, c)) : raw_dbm(r, c);
      sum += v;
    }
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = mode == NormMode::MwZscore ? dbm_to_mw(raw_dbm(r, c)) : raw_dbm(r, c);
      ss += (v - mu) * (v - mu);
    }
    double sigma = std::sqrt(ss / static_cast<double>(n));
    if (!(sigma >= kSigmaFloor)) {
      sigma = kSigmaFloor;
      stats.floored[c] = true;
    }
    stats.mu[c] = mu;
    stats.sigma[c] = sigma;
  }
  return stats;
}

std::vector<double> apply_norm(std::span<const double> raw_dbm, const NormStats& stats) {
  require(raw_dbm.size() == stats.dim(), ErrorKind::Dimension,
          "fingerprint has " + std::to_string(raw_dbm.size()) + " channels, normalization expects " +
              std::to_string(stats.dim()));
  std::vector<double> out(raw_dbm.size());
  for (std::size_t i = 0; i < raw_dbm.size(); ++i) {
    const double v = stats.mode == NormMode::MwZscore ? dbm_to_mw(raw_dbm[i]) : raw_dbm[i];
    out[i] = (v - stats.mu[i]) / stats.sigma[i];
  }
  return out;
}

Matrix apply_norm(const Matrix& raw_dbm, const NormStats& stats) {
  Matrix out(raw_dbm.rows(), raw_dbm.cols());
  for (std::size_t r = 0; r < raw_dbm.rows(); ++r) {
    auto z = apply_norm(raw_dbm.row(r), stats);
    std::copy(z.begin(), z.end(), out.row(r).begin());
  }
  return out;
}

ChannelVariances fit_channel_variances(const Matrix& train_normalized, double shrinkage) {
  require(train_normalized.rows() >= 2, ErrorKind::Precondition, "channel variances need at least two samples");
  const std::size_t n = train_normalized.rows();
  ChannelVariances cv;
  cv.shrinkage = shrinkage;
  cv.var.assign(train_normalized.cols(), 0.0);
  for (std::size_t c = 0; c < train_normalized.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += train_normalized(r, c);
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (train_normalized(r, c) - mu) * (train_normalized(r, c) - mu);
    cv.var[c] = ss / static_cast<double>(n - 1) + shrinkage;
  }
  return cv;
}

std::vector<double> ChannelVariances::stddev() const {
  std::vector<double> out(var.size());
  for (std::size_t i = 0; i < var.size(); ++i) out[i] = std::sqrt(var[i]);
  return out;
}

}  // namespace fpfuse
