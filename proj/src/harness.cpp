#include "fpfuse/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "fpfuse/error.hpp"
#include "fpfuse/parallel.hpp"

namespace fpfuse {

namespace {

const std::array<Variant, 4> kVariants{{
    {"PF+RF", false, false},
    {"PF+RF+KNN+DST", false, true},
    {"PF+PH+RF", true, false},
    {"PF+PH+RF+KNN+DST", true, true},
}};

std::vector<Position> pick(std::span<const SamplePrediction> preds, auto&& fn) {
  std::vector<Position> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(fn(p));
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::span<const Variant> ablation_variants() { return kVariants; }

std::vector<std::size_t> stratified_folds(const RadioMap& map, std::size_t folds, std::uint64_t seed) {
  require(folds >= 2, ErrorKind::Precondition, "cross-validation needs at least 2 folds");
  std::map<std::int64_t, std::vector<std::size_t>> by_rp;
  for (std::size_t i = 0; i < map.samples.size(); ++i) by_rp[map.samples[i].rp_id].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> fold(map.size());
  for (auto& [rp, idx] : by_rp) {
    if (idx.size() < folds)
      fail(ErrorKind::Precondition, "RP " + std::to_string(rp) + " has " + std::to_string(idx.size()) +
                                        " samples, fewer than " + std::to_string(folds) + " folds");
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = j % folds;
  }
  return fold;
}

namespace {

struct FoldData {
  RadioMap train;
  RadioMap test;
};

std::vector<FoldData> make_folds(const RadioMap& map, std::size_t folds, std::uint64_t seed) {
  const auto ids = stratified_folds(map, folds, seed);
  std::vector<FoldData> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < ids.size(); ++i) (ids[i] == f ? te : tr).push_back(i);
    out[f] = {subset(map, tr), subset(map, te)};
  }
  return out;
}

struct FoldFeatures {
  Matrix train;
  Matrix test;
  std::vector<Position> train_y;
  std::vector<Position> test_y;
};

// Runs the frontend per fold, optionally with the PH block appended.
std::vector<FoldFeatures> fold_features(const std::vector<FoldData>& folds, const PipelineConfig& cfg,
                                        std::size_t threads) {
  std::vector<FoldFeatures> out(folds.size());
  parallel_for(folds.size(), threads, [&](std::size_t f) {
    const Frontend fe = Frontend::fit(folds[f].train, cfg);
    FoldFeatures ff{fe.process(folds[f].train), fe.process(folds[f].test), folds[f].train.positions(),
                    folds[f].test.positions()};
    if (cfg.use_ph) {
      const auto feats = ph_features_rows(ff.train);
      const auto stats = fit_ph_stats(feats);
      ff.train = augment_matrix(ff.train, feats, stats);
      ff.test = augment_matrix(ff.test, ph_features_rows(ff.test), stats);
    }
    out[f] = std::move(ff);
  });
  return out;
}

double knn_rmse(const FoldFeatures& ff, std::size_t k, double eps) {
  const KnnIndex index = build_knn_index(ff.train, ff.train_y, fit_channel_variances(ff.train));
  std::vector<Position> pred(ff.test.rows());
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = predict_wknn(index, ff.test.row(i), k, eps);
  return rmse_xy(pred, ff.test_y);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// Index of the lowest mean RMSE; strict comparison keeps the first on ties.
std::size_t argmin_mean(const std::vector<CvCandidate>& c, std::size_t begin) {
  std::size_t best = begin;
  for (std::size_t i = begin + 1; i < c.size(); ++i)
    if (c[i].mean_rmse < c[best].mean_rmse) best = i;
  return best;
}

CvCandidate scored(std::string stage, std::string label, std::vector<double> fold_rmse) {
  CvCandidate c{std::move(stage), std::move(label), mean(fold_rmse), std::move(fold_rmse)};
  return c;
}

}  // namespace

CvSelection cv_grid_search(const RadioMap& train, const CvGrids& grids, const PipelineConfig& base,
                           std::size_t folds, std::uint64_t seed) {
  require(!grids.q_gamma.empty() && !grids.k.empty() && !grids.n_trees.empty() && !grids.max_depth.empty() &&
              !grids.alpha.empty() && !grids.h.empty() && !grids.n_particles.empty() && !grids.ess_tau.empty(),
          ErrorKind::Precondition, "every CV grid needs at least one entry");
  const auto fold_maps = make_folds(train, folds, seed);
  const std::size_t threads = default_threads();
  CvSelection sel;
  sel.config = base;
  auto& cfg = sel.config;

  // Filters, scored by wKNN on the plain filtered fingerprints.
  {
    std::vector<PipelineConfig> cands;
    std::vector<std::string> labels;
    for (double q : grids.q_gamma) {
      if (base.filter_method == FilterMethod::Pf) {
        for (std::size_t m : grids.n_particles)
          for (double tau : grids.ess_tau) {
            PipelineConfig c = cfg;
            c.q_gamma = q;
            c.pf.n_particles = m;
            c.pf.ess_tau = tau;
            c.use_ph = false;
            cands.push_back(c);
            labels.push_back(fmt("gamma=%g M_p=%zu tau=%g", q, m, tau));
          }
      } else {
        PipelineConfig c = cfg;
        c.q_gamma = q;
        c.use_ph = false;
        cands.push_back(c);
        labels.push_back(fmt("gamma=%g", q));
      }
      if (base.filter_method == FilterMethod::None) break;
    }
    const std::size_t first = sel.candidates.size();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto ff = fold_features(fold_maps, cands[i], threads);
      std::vector<double> r;
      for (const auto& f : ff) r.push_back(knn_rmse(f, cfg.k, cfg.knn_eps));
      sel.candidates.push_back(scored("filter", labels[i], std::move(r)));
    }
    const std::size_t win = argmin_mean(sel.candidates, first) - first;
    cfg.q_gamma = cands[win].q_gamma;
    cfg.pf = cands[win].pf;
  }

  const auto ff = fold_features(fold_maps, cfg, threads);

  // wKNN neighbourhood size.
  {
    const std::size_t first = sel.candidates.size();
    for (std::size_t k : grids.k) {
      std::vector<double> r;
      for (const auto& f : ff) r.push_back(knn_rmse(f, k, cfg.knn_eps));
      sel.candidates.push_back(scored("knn", fmt("k=%zu", k), std::move(r)));
    }
    cfg.k = grids.k[argmin_mean(sel.candidates, first) - first];
  }

  // Forest: one forest per depth at the largest T, scored on tree prefixes.
  {
    const std::size_t first = sel.candidates.size();
    const std::size_t t_max = *std::max_element(grids.n_trees.begin(), grids.n_trees.end());
    std::vector<std::pair<std::size_t, std::size_t>> combos;
    for (std::size_t depth : grids.max_depth)
      for (std::size_t t : grids.n_trees) combos.emplace_back(t, depth);
    std::vector<std::vector<double>> rmse(combos.size(), std::vector<double>(ff.size()));
    for (std::size_t d = 0; d < grids.max_depth.size(); ++d) {
      RfConfig rc = cfg.rf;
      rc.n_trees = t_max;
      rc.max_depth = grids.max_depth[d];
      rc.threads = threads;
      for (std::size_t f = 0; f < ff.size(); ++f) {
        const RfModel model = train_rf(ff[f].train, ff[f].train_y, rc);
        for (std::size_t t = 0; t < grids.n_trees.size(); ++t) {
          std::vector<Position> pred(ff[f].test.rows());
          for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = model.predict(ff[f].test.row(i), grids.n_trees[t]);
          rmse[d * grids.n_trees.size() + t][f] = rmse_xy(pred, ff[f].test_y);
        }
      }
    }
    for (std::size_t i = 0; i < combos.size(); ++i)
      sel.candidates.push_back(scored("rf", fmt("T=%zu depth=%zu", combos[i].first, combos[i].second), rmse[i]));
    const auto win = combos[argmin_mean(sel.candidates, first) - first];
    cfg.rf.n_trees = win.first;
    cfg.rf.max_depth = win.second;
  }

  // Fusion: DST point RMSE per (alpha, h) with the chosen regressors.
  {
    std::vector<std::vector<Position>> rf_pred(ff.size()), knn_pred(ff.size());
    for (std::size_t f = 0; f < ff.size(); ++f) {
      RfConfig rc = cfg.rf;
      rc.threads = threads;
      const RfModel model = train_rf(ff[f].train, ff[f].train_y, rc);
      const KnnIndex index = build_knn_index(ff[f].train, ff[f].train_y, fit_channel_variances(ff[f].train));
      for (std::size_t i = 0; i < ff[f].test.rows(); ++i) {
        rf_pred[f].push_back(model.predict(ff[f].test.row(i)));
        knn_pred[f].push_back(predict_wknn(index, ff[f].test.row(i), cfg.k, cfg.knn_eps));
      }
    }
    const std::size_t first = sel.candidates.size();
    std::vector<std::pair<double, double>> combos;
    for (double h : grids.h)
      for (double a : grids.alpha) {
        const GridSpec grid = make_grid(train.bounds, h);
        std::vector<double> rc, rf;
        for (std::size_t f = 0; f < ff.size(); ++f) {
          double sc = 0.0, sf = 0.0;
          for (std::size_t i = 0; i < rf_pred[f].size(); ++i) {
            double dc = std::numeric_limits<double>::infinity(), df = dc;
            try {
              const Bba m = dempster_combine(bba_from_point(rf_pred[f][i], grid, a, cfg.theta_discount),
                                             bba_from_point(knn_pred[f][i], grid, a, cfg.theta_discount));
              dc = distance(argmax_belief(m, grid).centroid, ff[f].test_y[i]);
              df = distance(belief_mean(m, grid), ff[f].test_y[i]);
            } catch (const Error& e) {
              if (e.kind() != ErrorKind::Conflict) throw;
            }
            sc += dc * dc;
            sf += df * df;
          }
          const double n = static_cast<double>(rf_pred[f].size());
          rc.push_back(std::sqrt(sc / n));
          rf.push_back(std::sqrt(sf / n));
        }
        const double mc = mean(rc), mf = mean(rf);
        const bool use_centroid = cfg.point_rule == PointRule::Centroid ||
                                  (cfg.point_rule == PointRule::Auto && mc <= mf);
        sel.candidates.push_back(scored("fusion", fmt("alpha=%g h=%g", a, h), use_centroid ? rc : rf));
        combos.emplace_back(a, h);
      }
    const auto win = combos[argmin_mean(sel.candidates, first) - first];
    cfg.alpha_grid = {win.first};
    cfg.h_grid = {win.second};
  }
  return sel;
}

double EvalReport::mean_rmse(std::size_t variant, std::size_t condition) const {
  return mean(rmse.at(variant).at(condition));
}

std::size_t EvalReport::variant_index(const std::string& name) const {
  const auto it = std::find(variants.begin(), variants.end(), name);
  require(it != variants.end(), ErrorKind::Precondition, "unknown variant '" + name + "'");
  return static_cast<std::size_t>(it - variants.begin());
}

std::size_t EvalReport::condition_index(const std::string& name) const {
  const auto it = std::find(conditions.begin(), conditions.end(), name);
  require(it != conditions.end(), ErrorKind::Precondition, "unknown condition '" + name + "'");
  return static_cast<std::size_t>(it - conditions.begin());
}

namespace {

constexpr std::array<const char*, 4> kAlternatives{"centroid", "fused_regression", "choquet", "convex"};

struct RepeatResult {
  // [variant][condition]
  std::vector<std::vector<double>> rmse;
  std::vector<std::vector<std::vector<double>>> errors;
  // [alternative][variant][condition]
  std::vector<std::vector<std::vector<double>>> alt;
  std::string rule;
  double t_frontend = 0.0, t_fit = 0.0, t_predict = 0.0;
};

std::vector<double> errors_of(std::span<const Position> pred, std::span<const Position> truth) {
  std::vector<double> e(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) e[i] = distance(pred[i], truth[i]);
  return e;
}

RepeatResult run_repeat(const RadioMap& map, const SplitSpec& split, const LadderConfig& cfg, std::size_t r,
                        std::size_t rf_threads) {
  const std::size_t n_cond = 1 + cfg.noise.size();
  RepeatResult out;
  out.rmse.assign(kVariants.size(), std::vector<double>(n_cond));
  out.errors.assign(kVariants.size(), std::vector<std::vector<double>>(n_cond));
  out.alt.assign(kAlternatives.size(),
                 std::vector<std::vector<double>>(kVariants.size(), std::vector<double>(n_cond)));

  auto t0 = std::chrono::steady_clock::now();
  const SplitResult parts = stratified_split(map, split);
  PipelineConfig pcfg = cfg.pipeline;
  pcfg.rf.threads = rf_threads;
  const Frontend fe = Frontend::fit(parts.train, pcfg);
  const Matrix x_train = fe.process(parts.train);
  const Matrix x_val = fe.process(parts.val);
  std::vector<Matrix> x_test;
  x_test.push_back(fe.process(parts.test));
  for (std::size_t c = 0; c < cfg.noise.size(); ++c) x_test.push_back(fe.process(parts.test, &cfg.noise[c], r));
  out.t_frontend = seconds_since(t0);

  const auto train_y = parts.train.positions();
  const auto val_y = parts.val.positions();
  const auto test_y = parts.test.positions();
  for (bool ph : {false, true}) {
    t0 = std::chrono::steady_clock::now();
    pcfg.use_ph = ph;
    const Backend be = Backend::fit(x_train, train_y, x_val, val_y, map.bounds, pcfg);
    out.t_fit += seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    if (ph) out.rule = be.fusion.rule == PointRule::Centroid ? "centroid" : "fused_regression";
    for (std::size_t c = 0; c < n_cond; ++c) {
      const auto preds = be.predict_all(x_test[c]);
      for (std::size_t v = 0; v < kVariants.size(); ++v) {
        if (kVariants[v].use_ph != ph) continue;
        const auto pos = kVariants[v].fused ? pick(preds, [&](const SamplePrediction& p) { return p.dst(be.fusion.rule); })
                                            : pick(preds, [](const SamplePrediction& p) { return p.rf; });
        out.rmse[v][c] = rmse_xy(pos, test_y);
        out.errors[v][c] = errors_of(pos, test_y);
        if (!kVariants[v].fused) continue;
        const std::array<std::vector<Position>, 4> alts{
            pick(preds, [](const SamplePrediction& p) { return p.dst_centroid; }),
            pick(preds, [](const SamplePrediction& p) { return p.dst_fused; }),
            pick(preds, [&](const SamplePrediction& p) { return be.point(p, FusionMode::Choquet, 0.5); }),
            pick(preds, [&](const SamplePrediction& p) { return be.point(p, FusionMode::Convex, pcfg.lambda); }),
        };
        for (std::size_t a = 0; a < alts.size(); ++a) out.alt[a][v][c] = rmse_xy(alts[a], test_y);
      }
    }
    out.t_predict += seconds_since(t0);
  }
  return out;
}

}  // namespace

EvalReport run_ablation_ladder(std::span<const RadioMap> maps, const LadderConfig& config) {
  require(!maps.empty(), ErrorKind::Precondition, "ablation ladder needs at least one radio map");
  const std::size_t repeats = maps.size() > 1 ? maps.size() : config.repeats;
  require(repeats >= 1, ErrorKind::Precondition, "ablation ladder needs at least one repeat");
  for (const auto& m : maps) m.validate();

  EvalReport rep;
  for (const auto& v : kVariants) rep.variants.push_back(v.name);
  rep.conditions.push_back("clean");
  for (const auto& n : config.noise) rep.conditions.push_back(n.label());
  const std::size_t n_var = rep.variants.size(), n_cond = rep.conditions.size();

  const std::size_t threads = config.threads ? config.threads : default_threads();
  const std::size_t outer = std::min(threads, repeats);
  const std::size_t rf_threads = std::max<std::size_t>(1, threads / std::max<std::size_t>(1, outer));

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<RepeatResult> results(repeats);
  parallel_for(repeats, outer, [&](std::size_t r) {
    SplitSpec split = config.split;
    if (maps.size() == 1 && r > 0) split.seed = derive_seed(config.split.seed, {r});
    results[r] = run_repeat(maps.size() > 1 ? maps[r] : maps[0], split, config, r, rf_threads);
  });

  rep.rmse.assign(n_var, std::vector<std::vector<double>>(n_cond, std::vector<double>(repeats)));
  for (const char* a : kAlternatives)
    rep.alternatives[a].assign(n_var, std::vector<std::vector<double>>(n_cond));
  double tf = 0.0, tb = 0.0, tp = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    for (std::size_t v = 0; v < n_var; ++v)
      for (std::size_t c = 0; c < n_cond; ++c) {
        rep.rmse[v][c][r] = results[r].rmse[v][c];
        if (!kVariants[v].fused) continue;
        for (std::size_t a = 0; a < kAlternatives.size(); ++a)
          rep.alternatives[kAlternatives[a]][v][c].push_back(results[r].alt[a][v][c]);
      }
    rep.selected_rules.push_back(results[r].rule);
    tf += results[r].t_frontend;
    tb += results[r].t_fit;
    tp += results[r].t_predict;
  }
  rep.canonical_errors = std::move(results[0].errors);
  rep.runtime_s["frontend"] = tf;
  rep.runtime_s["backend_fit"] = tb;
  rep.runtime_s["predict"] = tp;
  rep.runtime_s["wall"] = seconds_since(t0);

  rep.ci.assign(n_var, std::vector<ConfidenceInterval>(n_cond));
  for (std::size_t v = 0; v < n_var; ++v)
    for (std::size_t c = 0; c < n_cond; ++c) {
      const auto& xs = rep.rmse[v][c];
      if (xs.size() >= 2) {
        rep.ci[v][c] = t_confidence_interval(xs);
      } else {
        rep.ci[v][c] = {xs[0], 0.0, xs[0], xs[0]};
      }
    }

  // Every other variant against the PF+RF baseline, per condition; Holm runs
  // over the whole family separately for the per-sample and per-split tests.
  const std::size_t base = 0;
  for (std::size_t c = 0; c < n_cond; ++c)
    for (std::size_t v = 1; v < n_var; ++v) {
      Comparison cmp;
      cmp.condition = rep.conditions[c];
      cmp.baseline = rep.variants[base];
      cmp.candidate = rep.variants[v];
      const auto& eb = rep.canonical_errors[base][c];
      const auto& ev = rep.canonical_errors[v][c];
      if (eb.size() >= 5) cmp.wilcoxon_samples = wilcoxon_signed_rank(ev, eb);
      else cmp.wilcoxon_samples.degenerate = true;
      if (repeats >= 5) cmp.wilcoxon_splits = wilcoxon_signed_rank(rep.rmse[v][c], rep.rmse[base][c]);
      else cmp.wilcoxon_splits.degenerate = true;
      if (repeats >= 2) cmp.t_splits = paired_t_test(rep.rmse[v][c], rep.rmse[base][c]);
      else cmp.t_splits.degenerate = true;
      rep.comparisons.push_back(cmp);
    }
  std::vector<double> ps, pr;
  for (const auto& c : rep.comparisons) {
    ps.push_back(c.wilcoxon_samples.p_value);
    pr.push_back(c.wilcoxon_splits.p_value);
  }
  const HolmResult hs = holm_bonferroni(ps, config.alpha);
  const HolmResult hr = holm_bonferroni(pr, config.alpha);
  for (std::size_t i = 0; i < rep.comparisons.size(); ++i) {
    rep.comparisons[i].holm_samples = hs.adjusted[i];
    rep.comparisons[i].reject_samples = hs.reject[i];
    rep.comparisons[i].holm_splits = hr.adjusted[i];
    rep.comparisons[i].reject_splits = hr.reject[i];
  }
  return rep;
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.precision(17);
  out << "variant,condition,split,rmse\n";
  for (std::size_t v = 0; v < report.variants.size(); ++v)
    for (std::size_t c = 0; c < report.conditions.size(); ++c)
      for (std::size_t r = 0; r < report.rmse[v][c].size(); ++r)
        out << report.variants[v] << ",\"" << report.conditions[c] << "\"," << r << ',' << report.rmse[v][c][r]
            << '\n';
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::string format_ci_table(const EvalReport& report, std::size_t condition) {
  std::ostringstream os;
  for (std::size_t v = 0; v < report.variants.size(); ++v) {
    const auto& ci = report.ci.at(v).at(condition);
    os << fmt("%-20s %.3f +- %.3f\n", report.variants[v].c_str(), ci.mean, ci.half_width);
  }
  return os.str();
}

}  // namespace fpfuse
