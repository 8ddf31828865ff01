#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpfuse/rng.hpp"

namespace fpfuse {

enum class NoiseKind { GaussJitter, Bursty, Dbm10Pct };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Dbm10Pct;
  double eta = 0.10;
  double p = 0.05;
  double kappa = 2.0;
  double level = 0.10;
  std::uint64_t seed = 123;

  // Short label used in reports, e.g. "dbm_10pct(level=0.1)".
  std::string label() const;
  // Raw-dBm noise is injected before normalization, the others after.
  bool applies_to_raw() const { return kind == NoiseKind::Dbm10Pct; }
};

std::vector<double> inject_gauss_jitter(std::span<const double> z_norm, std::span<const double> sigma_hat,
                                        double eta, Rng& rng);

std::vector<double> inject_bursty(std::span<const double> z_norm, std::span<const double> sigma_hat, double p,
                                  double kappa, Rng& rng);

std::vector<double> inject_dbm_10pct(std::span<const double> f_raw_dbm, std::span<const double> sigma_train_dbm,
                                     double level, Rng& rng);

// Dispatches on spec.kind. `sigma` is sigma_hat for normalized noise and the
// training dBm std for the raw model.
std::vector<double> inject(const NoiseSpec& spec, std::span<const double> values, std::span<const double> sigma,
                           Rng& rng);

}  // namespace fpfuse
