#include "fpfuse/noise.hpp"

#include <random>
#include <sstream>

#include "fpfuse/error.hpp"

namespace fpfuse {

std::string NoiseSpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case NoiseKind::GaussJitter: os << "gauss_jitter(eta=" << eta << ")"; break;
    case NoiseKind::Bursty: os << "bursty(p=" << p << ",kappa=" << kappa << ")"; break;
    case NoiseKind::Dbm10Pct: os << "dbm_10pct(level=" << level << ")"; break;
  }
  return os.str();
}

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  require(a == b, ErrorKind::Dimension, "noise scale vector length does not match the input");
}

}  // namespace

std::vector<double> inject_gauss_jitter(std::span<const double> z_norm, std::span<const double> sigma_hat,
                                        double eta, Rng& rng) {
  require(eta >= 0.0, ErrorKind::Precondition, "eta must be non-negative");
  check_lengths(z_norm.size(), sigma_hat.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(z_norm.begin(), z_norm.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += eta * sigma_hat[i] * normal(rng);
  return out;
}

std::vector<double> inject_bursty(std::span<const double> z_norm, std::span<const double> sigma_hat, double p,
                                  double kappa, Rng& rng) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::Precondition, "burst probability must be in [0, 1]");
  require(kappa >= 0.0, ErrorKind::Precondition, "kappa must be non-negative");
  check_lengths(z_norm.size(), sigma_hat.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> out(z_norm.begin(), z_norm.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(unit(rng) < p)) continue;
    const double magnitude = expo(rng);
    const double u = coin(rng) ? magnitude : -magnitude;
    out[i] += kappa * sigma_hat[i] * u;
  }
  return out;
}

std::vector<double> inject_dbm_10pct(std::span<const double> f_raw_dbm, std::span<const double> sigma_train_dbm,
                                     double level, Rng& rng) {
  require(level >= 0.0, ErrorKind::Precondition, "noise level must be non-negative");
  check_lengths(f_raw_dbm.size(), sigma_train_dbm.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(f_raw_dbm.begin(), f_raw_dbm.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += level * sigma_train_dbm[i] * normal(rng);
  return out;
}

std::vector<double> inject(const NoiseSpec& spec, std::span<const double> values, std::span<const double> sigma,
                           Rng& rng) {
  switch (spec.kind) {
    case NoiseKind::GaussJitter: return inject_gauss_jitter(values, sigma, spec.eta, rng);
    case NoiseKind::Bursty: return inject_bursty(values, sigma, spec.p, spec.kappa, rng);
    case NoiseKind::Dbm10Pct: return inject_dbm_10pct(values, sigma, spec.level, rng);
  }
  fail(ErrorKind::Precondition, "unknown noise kind");
}

}  // namespace fpfuse
