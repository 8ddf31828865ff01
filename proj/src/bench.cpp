#include "fpfuse/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "fpfuse/error.hpp"
#include "fpfuse/stats.hpp"

namespace fpfuse {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::Precondition, "slope needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorKind::Precondition, "log-log slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

using Clock = std::chrono::steady_clock;

// Median wall time of fn(i) over n calls.
template <class Fn>
double median_ns(std::size_t n, Fn&& fn) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    fn(i);
    t[i] = std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
  }
  return median(std::move(t));
}

// Raw dBm scans reconstructed from stored training features.
std::vector<std::vector<double>> probe_scans(const Pipeline& pl, std::size_t n, std::uint64_t seed) {
  const Matrix& pts = pl.backend.knn.points();
  require(pts.rows() > 0, ErrorKind::Precondition, "pipeline has no stored training points");
  const auto& ns = pl.frontend.norm;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.rows() - 1);
  std::vector<std::vector<double>> out(n, std::vector<double>(pl.dim()));
  for (auto& scan : out) {
    const auto row = pts.row(pick(rng));
    for (std::size_t c = 0; c < scan.size(); ++c) {
      const double v = row[c] * ns.sigma[c] + ns.mu[c];
      scan[c] = ns.mode == NormMode::DbmZscore ? v : 10.0 * std::log10(std::max(v, 1e-12));
    }
  }
  return out;
}

double filter_update_ns(const FilterConfig& cfg, const std::vector<std::vector<double>>& z, std::uint64_t seed) {
  std::vector<ChannelFilter> filters;
  for (std::size_t c = 0; c < cfg.r.size(); ++c) filters.emplace_back(cfg, c, derive_seed(seed, {c}));
  for (std::size_t c = 0; c < filters.size(); ++c) filters[c].update(z[0][c]);
  double sink = 0.0;
  const double t = median_ns(z.size(), [&](std::size_t i) {
    for (std::size_t c = 0; c < filters.size(); ++c) sink += filters[c].update(z[i][c]);
  });
  volatile double keep = sink;
  (void)keep;
  return t;
}

}  // namespace

BenchReport run_bench(const Pipeline& pl, std::size_t n_queries, std::uint64_t seed) {
  require(n_queries >= 1, ErrorKind::Precondition, "bench needs at least one query");
  BenchReport rep;
  rep.n_queries = n_queries;
  const auto scans = probe_scans(pl, n_queries, seed);
  const Backend& be = pl.backend;

  std::vector<std::vector<double>> z(n_queries), filtered(n_queries), feats(n_queries);
  std::vector<SamplePrediction> preds(n_queries);
  double sink = 0.0;

  const double t_norm = median_ns(n_queries, [&](std::size_t i) { z[i] = apply_norm(scans[i], pl.frontend.norm); });
  {
    std::vector<ChannelFilter> filters;
    for (std::size_t c = 0; c < pl.dim(); ++c)
      filters.emplace_back(pl.frontend.filter, c, derive_seed(pl.frontend.filter.pf.seed, {0u, c}));
    for (std::size_t i = 0; i < n_queries; ++i) filtered[i] = z[i];
    rep.stages.push_back({"normalize", t_norm});
    rep.stages.push_back({"filter", median_ns(n_queries, [&](std::size_t i) {
                            for (std::size_t c = 0; c < filters.size(); ++c) filtered[i][c] = filters[c].update(z[i][c]);
                          })});
  }
  rep.stages.push_back({"ph", median_ns(n_queries, [&](std::size_t i) { feats[i] = be.features(filtered[i]); })});
  rep.stages.push_back({"rf", median_ns(n_queries, [&](std::size_t i) { preds[i].rf = be.rf.predict(feats[i]); })});
  rep.stages.push_back({"knn", median_ns(n_queries, [&](std::size_t i) {
                          preds[i].knn = predict_wknn(be.knn, feats[i], be.k, be.knn_eps);
                        })});
  auto dst_stage = [&](const GridSpec& grid, std::size_t i) {
    const Bba m = dempster_combine(bba_from_point(preds[i].rf, grid, be.fusion.alpha, be.fusion.theta_discount),
                                   bba_from_point(preds[i].knn, grid, be.fusion.alpha, be.fusion.theta_discount));
    sink += argmax_belief(m, grid).centroid.x + belief_mean(m, grid).x;
  };
  rep.stages.push_back({"dst", median_ns(n_queries, [&](std::size_t i) { dst_stage(be.grid, i); })});
  rep.stages.push_back({"choquet", median_ns(n_queries, [&](std::size_t i) {
                          const double s1 = confidence(preds[i].rf, be.grid, be.fusion.beta);
                          const double s2 = confidence(preds[i].knn, be.grid, be.fusion.beta);
                          sink += choquet(s1, s2, be.fusion.measure);
                        })});
  rep.stages.push_back({"total", median_ns(n_queries, [&](std::size_t i) { sink += pl.predict(scans[i]).position.x; })});

  // Forest size, on prefixes of the trained forest.
  {
    ScalingSeries s{"T", {}, {}, 0.0};
    for (std::size_t t : {25u, 50u, 100u, 200u, 400u}) {
      if (t > be.rf.trees.size()) break;
      s.values.push_back(static_cast<double>(t));
      s.median_ns.push_back(median_ns(n_queries, [&](std::size_t i) { sink += be.rf.predict(feats[i], t).x; }));
    }
    if (s.values.size() >= 2) s.slope = loglog_slope(s.values, s.median_ns);
    rep.scaling.push_back(std::move(s));
  }

  // Particle count, per update over all channels.
  {
    ScalingSeries s{"M_p", {}, {}, 0.0};
    FilterConfig cfg = pl.frontend.filter;
    cfg.method = FilterMethod::Pf;
    for (std::size_t m : {1250u, 2500u, 5000u, 10000u, 20000u}) {
      cfg.pf.n_particles = m;
      s.values.push_back(static_cast<double>(m));
      s.median_ns.push_back(filter_update_ns(cfg, z, seed));
      if (m == 10000u) rep.pf_filter_ns = s.median_ns.back();
    }
    s.slope = loglog_slope(s.values, s.median_ns);
    rep.scaling.push_back(std::move(s));
    cfg.method = FilterMethod::Kf;
    rep.kf_filter_ns = filter_update_ns(cfg, z, seed);
    cfg.method = FilterMethod::None;
    rep.none_filter_ns = filter_update_ns(cfg, z, seed);
    rep.pf_kf_ratio = rep.pf_filter_ns / std::max(rep.kf_filter_ns, 1e-3);
  }

  // Grid size: cell width shrunk by sqrt(2) per step doubles S.
  {
    ScalingSeries s{"S", {}, {}, 0.0};
    double h = be.fusion.h;
    for (int step = 0; step < 4; ++step, h /= std::sqrt(2.0)) {
      const GridSpec grid = make_grid(pl.bounds, h);
      s.values.push_back(static_cast<double>(grid.size()));
      s.median_ns.push_back(median_ns(n_queries, [&](std::size_t i) { dst_stage(grid, i); }));
    }
    s.slope = loglog_slope(s.values, s.median_ns);
    rep.scaling.push_back(std::move(s));
  }

  volatile double keep = sink;
  (void)keep;
  return rep;
}

}  // namespace fpfuse
