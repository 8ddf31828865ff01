#include "fpfuse/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "fpfuse/error.hpp"

namespace fpfuse {

void FilterConfig::validate() const {
  for (double v : r) require(v > 0.0 && std::isfinite(v), ErrorKind::Precondition, "filter R must be positive");
  require(q_gamma >= 0.0, ErrorKind::Precondition, "filter q_gamma must be >= 0");
  if (method == FilterMethod::Pf) {
    require(pf.n_particles >= 2, ErrorKind::Precondition, "particle filter needs at least 2 particles");
    require(pf.ess_tau > 0.0 && pf.ess_tau < 1.0, ErrorKind::Precondition, "ESS threshold must be in (0, 1)");
    require(pf.predict_sigma >= 0.0, ErrorKind::Precondition, "PF prediction std must be >= 0");
  }
}

KfState kf_step(KfState state, double z, double q, double r) {
  const double p_pred = state.p + q;
  const double gain = p_pred / (p_pred + r);
  state.x_hat += gain * (z - state.x_hat);
  state.p = (1.0 - gain) * p_pred;
  return state;
}

KfState ukf_step(KfState state, double z, double q, double r, const UkfParams& params) {
  constexpr double n = 1.0;
  const double lambda = params.alpha * params.alpha * (n + params.kappa) - n;
  const double wm0 = lambda / (n + lambda);
  const double wc0 = wm0 + (1.0 - params.alpha * params.alpha + params.beta);
  const double wi = 1.0 / (2.0 * (n + lambda));

  // Identity process model: propagate sigma points of (x, p) unchanged.
  const double spread = std::sqrt((n + lambda) * state.p);
  const double chi[3] = {state.x_hat, state.x_hat + spread, state.x_hat - spread};
  const double x_pred = wm0 * chi[0] + wi * (chi[1] + chi[2]);
  double p_pred = wc0 * (chi[0] - x_pred) * (chi[0] - x_pred) +
                  wi * ((chi[1] - x_pred) * (chi[1] - x_pred) + (chi[2] - x_pred) * (chi[2] - x_pred)) + q;
  if (!(p_pred > 0.0)) fail(ErrorKind::Numeric, "UKF predicted variance is not positive");

  // Redraw around the prediction, identity measurement model.
  const double s2 = std::sqrt((n + lambda) * p_pred);
  const double gamma[3] = {x_pred, x_pred + s2, x_pred - s2};
  const double z_pred = wm0 * gamma[0] + wi * (gamma[1] + gamma[2]);
  double pzz = r;
  double pxz = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double w = i == 0 ? wc0 : wi;
    pzz += w * (gamma[i] - z_pred) * (gamma[i] - z_pred);
    pxz += w * (gamma[i] - x_pred) * (gamma[i] - z_pred);
  }
  const double gain = pxz / pzz;
  state.x_hat = x_pred + gain * (z - z_pred);
  state.p = p_pred - gain * gain * pzz;
  if (!(state.p > 0.0)) state.p = std::numeric_limits<double>::min();
  return state;
}

double PfState::estimate() const {
  // Offsets from the first particle keep a collapsed cloud exactly at its value.
  if (particles.empty()) return 0.0;
  const double origin = particles[0];
  double acc = 0.0, total = 0.0;
  for (std::size_t m = 0; m < particles.size(); ++m) {
    acc += weights[m] * (particles[m] - origin);
    total += weights[m];
  }
  return origin + acc / total;
}

double effective_sample_size(std::span<const double> weights) {
  double ss = 0.0;
  for (double w : weights) ss += w * w;
  return ss > 0.0 ? 1.0 / ss : 0.0;
}

double PfState::ess() const { return effective_sample_size(weights); }

PfState pf_init(double z, std::size_t n_particles, Rng& rng) {
  PfState s;
  s.particles.resize(n_particles);
  s.weights.assign(n_particles, 1.0 / static_cast<double>(n_particles));
  std::normal_distribution<double> init(z, 1.0);
  for (auto& p : s.particles) p = init(rng);
  return s;
}

void systematic_resample(PfState& state, Rng& rng) {
  const std::size_t n = state.particles.size();
  const double step = 1.0 / static_cast<double>(n);
  std::uniform_real_distribution<double> offset(0.0, step);
  const double u0 = offset(rng);
  std::vector<double> picked(n);
  double cumulative = state.weights[0];
  std::size_t i = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const double u = u0 + static_cast<double>(m) * step;
    while (u > cumulative && i + 1 < n) cumulative += state.weights[++i];
    picked[m] = state.particles[i];
  }
  state.particles = std::move(picked);
  std::fill(state.weights.begin(), state.weights.end(), step);
}

PfStepInfo pf_step(PfState& state, double z, double r, const PfParams& params, Rng& rng) {
  PfStepInfo info;
  const std::size_t n = state.particles.size();
  if (params.predict_sigma > 0.0) {
    std::normal_distribution<double> walk(0.0, params.predict_sigma);
    for (auto& p : state.particles) p += walk(rng);
  }
  // The likelihood is shifted by its largest exponent; normalization removes
  // the common factor.
  double min_sq = std::numeric_limits<double>::infinity();
  for (double p : state.particles) min_sq = std::min(min_sq, (p - z) * (p - z));
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double d = state.particles[m] - z;
    state.weights[m] *= std::exp(-(d * d - min_sq) / (2.0 * r));
    total += state.weights[m];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    std::fill(state.weights.begin(), state.weights.end(), 1.0 / static_cast<double>(n));
    info.degenerate = true;
  } else {
    for (auto& w : state.weights) w /= total;
  }
  if (state.ess() < params.ess_tau * static_cast<double>(n)) {
    systematic_resample(state, rng);
    info.resampled = true;
  }
  return info;
}

ChannelFilter::ChannelFilter(const FilterConfig& cfg, std::size_t channel, std::uint64_t seed)
    : cfg_(&cfg), channel_(channel), rng_(seed) {
  require(cfg.method == FilterMethod::None || channel < cfg.r.size(), ErrorKind::Dimension,
          "filter channel out of range");
}

double ChannelFilter::update(double z) {
  const auto& cfg = *cfg_;
  switch (cfg.method) {
    case FilterMethod::None:
      return z;
    case FilterMethod::Kf:
    case FilterMethod::Ukf: {
      const double r = cfg.r[channel_];
      if (!initialized_) {
        kf_ = {z, r};
        initialized_ = true;
      }
      kf_ = cfg.method == FilterMethod::Kf ? kf_step(kf_, z, cfg.q(channel_), r)
                                           : ukf_step(kf_, z, cfg.q(channel_), r, cfg.ukf);
      return kf_.x_hat;
    }
    case FilterMethod::Pf: {
      if (!initialized_) {
        pf_ = pf_init(z, cfg.pf.n_particles, rng_);
        initialized_ = true;
      }
      pf_step(pf_, z, cfg.r[channel_], cfg.pf, rng_);
      return pf_.estimate();
    }
  }
  return z;
}

Matrix filter_stream(const Matrix& series, const FilterConfig& cfg, std::uint64_t stream_id) {
  require(series.rows() >= 1, ErrorKind::Precondition, "filter stream needs at least one observation");
  if (cfg.method == FilterMethod::None) return series;
  require(series.cols() == cfg.r.size(), ErrorKind::Dimension,
          "stream has " + std::to_string(series.cols()) + " channels, filter expects " + std::to_string(cfg.r.size()));
  Matrix out(series.rows(), series.cols());
  for (std::size_t c = 0; c < series.cols(); ++c) {
    ChannelFilter filter(cfg, c, derive_seed(cfg.pf.seed, {stream_id, c}));
    for (std::size_t t = 0; t < series.rows(); ++t) out(t, c) = filter.update(series(t, c));
  }
  return out;
}

Matrix filter_segments(const Matrix& series, std::span<const std::pair<std::size_t, std::size_t>> segments,
                       const FilterConfig& cfg) {
  if (cfg.method == FilterMethod::None) return series;
  Matrix out(series.rows(), series.cols());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [begin, end] = segments[s];
    Matrix part(end - begin, series.cols());
    for (std::size_t r = begin; r < end; ++r)
      std::copy(series.row(r).begin(), series.row(r).end(), part.row(r - begin).begin());
    const Matrix filtered = filter_stream(part, cfg, s);
    for (std::size_t r = begin; r < end; ++r)
      std::copy(filtered.row(r - begin).begin(), filtered.row(r - begin).end(), out.row(r).begin());
  }
  return out;
}

}  // namespace fpfuse
