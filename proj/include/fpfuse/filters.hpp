#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fpfuse/matrix.hpp"
#include "fpfuse/rng.hpp"

namespace fpfuse {

enum class FilterMethod { None, Kf, Ukf, Pf };

struct PfParams {
  std::size_t n_particles = 10000;
  double ess_tau = 0.3;
  double predict_sigma = 1.0;  // random-walk std, normalized units
  std::uint64_t seed = 123;
};

struct UkfParams {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
};

struct FilterConfig {
  FilterMethod method = FilterMethod::Pf;
  double q_gamma = 0.5;   // Q_i = q_gamma * R_i
  std::vector<double> r;  // measurement variance per channel
  PfParams pf;
  UkfParams ukf;

  double q(std::size_t channel) const { return q_gamma * r[channel]; }
  void validate() const;
};

struct KfState {
  double x_hat = 0.0;
  double p = 1.0;
};

KfState kf_step(KfState state, double z, double q, double r);
KfState ukf_step(KfState state, double z, double q, double r, const UkfParams& params = {});

struct PfState {
  std::vector<double> particles;
  std::vector<double> weights;

  double estimate() const;
  double ess() const;
};

struct PfStepInfo {
  bool resampled = false;
  bool degenerate = false;  // every weight underflowed; reset to uniform
};

PfState pf_init(double z, std::size_t n_particles, Rng& rng);

// Predict, weight, normalize, and resample when ESS < tau * M_p.
PfStepInfo pf_step(PfState& state, double z, double r, const PfParams& params, Rng& rng);

double effective_sample_size(std::span<const double> weights);

// Single-offset stride resampling. Leaves weights uniform.
void systematic_resample(PfState& state, Rng& rng);

// Per-channel scalar filter state, initialized from the first observation.
class ChannelFilter {
 public:
  ChannelFilter(const FilterConfig& cfg, std::size_t channel, std::uint64_t seed);

  double update(double z);

 private:
  const FilterConfig* cfg_;
  std::size_t channel_;
  bool initialized_ = false;
  KfState kf_;
  PfState pf_;
  Rng rng_;
};

// Filter a T x d stream, channels independent. `stream_id` decorrelates the
// PF generators of different streams sharing one config.
Matrix filter_stream(const Matrix& series, const FilterConfig& cfg, std::uint64_t stream_id = 0);

// Filters each [begin, end) row range as its own stream.
Matrix filter_segments(const Matrix& series, std::span<const std::pair<std::size_t, std::size_t>> segments,
                       const FilterConfig& cfg);

}  // namespace fpfuse
