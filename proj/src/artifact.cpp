#include "fpfuse/artifact.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fpfuse/error.hpp"

namespace fpfuse {

namespace {

template <class E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<NormMode> kNormModes[] = {{NormMode::DbmZscore, "dbm_zscore"}, {NormMode::MwZscore, "mw_zscore"}};
constexpr EnumName<FilterMethod> kFilters[] = {
    {FilterMethod::None, "none"}, {FilterMethod::Kf, "kf"}, {FilterMethod::Ukf, "ukf"}, {FilterMethod::Pf, "pf"}};
constexpr EnumName<FusionMode> kFusions[] = {
    {FusionMode::Dst, "dst"}, {FusionMode::Choquet, "choquet"}, {FusionMode::Convex, "convex"}};
constexpr EnumName<PointRule> kRules[] = {
    {PointRule::Centroid, "centroid"}, {PointRule::FusedRegression, "fused_regression"}, {PointRule::Auto, "auto"}};
constexpr EnumName<NoiseKind> kNoiseKinds[] = {
    {NoiseKind::GaussJitter, "gauss_jitter"}, {NoiseKind::Bursty, "bursty"}, {NoiseKind::Dbm10Pct, "dbm_10pct"}};

template <class E, std::size_t N>
std::string enum_name(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  fail(ErrorKind::Schema, "enum value out of range");
}

template <class E, std::size_t N>
E enum_value(const EnumName<E> (&table)[N], const Json& j, const char* what) {
  const auto s = j.get<std::string>();
  std::string allowed;
  for (const auto& e : table) {
    if (s == e.name) return e.value;
    allowed += allowed.empty() ? e.name : std::string(", ") + e.name;
  }
  fail(ErrorKind::Schema, std::string("unknown ") + what + " '" + s + "' (expected one of: " + allowed + ")");
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::Schema, where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key)) fail(ErrorKind::Schema, "unknown key '" + key + "' in " + where);
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

// Converts library exceptions from malformed documents into schema errors.
template <class Fn>
auto schema_guard(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, where + ": " + e.what());
  }
}

Json bounds_to_json(const Bounds& b) { return Json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

Bounds bounds_from_json(const Json& j) {
  require(j.is_array() && j.size() == 4, ErrorKind::Schema, "bounds must be [x_min, y_min, x_max, y_max]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Json positions_to_json(std::span<const Position> ps) {
  std::vector<double> xs, ys;
  for (const auto& p : ps) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  return {{"x", xs}, {"y", ys}};
}

std::vector<Position> positions_from_json(const Json& j) {
  const auto xs = j.at("x").get<std::vector<double>>();
  const auto ys = j.at("y").get<std::vector<double>>();
  require(xs.size() == ys.size(), ErrorKind::Schema, "position arrays differ in length");
  std::vector<Position> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = {xs[i], ys[i]};
  return out;
}

Json matrix_to_json(const Matrix& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  require(data.size() == rows * cols, ErrorKind::Schema, "matrix data has the wrong length");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data().begin());
  return m;
}

Json tree_to_json(const RegressionTree& t) {
  std::vector<std::int32_t> feature, left, right;
  std::vector<double> threshold, vx, vy;
  std::vector<std::uint32_t> count;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    vx.push_back(n.value.x);
    vy.push_back(n.value.y);
    count.push_back(n.count);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
          {"value_x", vx},      {"value_y", vy},          {"count", count}};
}

RegressionTree tree_from_json(const Json& j, std::size_t n_features) {
  const auto feature = j.at("feature").get<std::vector<std::int32_t>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<std::int32_t>>();
  const auto right = j.at("right").get<std::vector<std::int32_t>>();
  const auto vx = j.at("value_x").get<std::vector<double>>();
  const auto vy = j.at("value_y").get<std::vector<double>>();
  const auto count = j.at("count").get<std::vector<std::uint32_t>>();
  const std::size_t n = feature.size();
  require(n > 0 && threshold.size() == n && left.size() == n && right.size() == n && vx.size() == n &&
              vy.size() == n && count.size() == n,
          ErrorKind::Schema, "tree node arrays differ in length");
  RegressionTree t;
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    node = {feature[i], threshold[i], left[i], right[i], {vx[i], vy[i]}, count[i]};
    if (node.is_leaf()) continue;
    const auto in_range = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && static_cast<std::size_t>(c) < n; };
    require(static_cast<std::size_t>(node.feature) < n_features && in_range(node.left) && in_range(node.right),
            ErrorKind::Schema, "tree node references are out of range");
  }
  return t;
}

Json rf_config_to_json(const RfConfig& c) {
  return {{"n_trees", c.n_trees}, {"max_depth", c.max_depth}, {"min_leaf", c.min_leaf},
          {"max_features", c.max_features}, {"seed", c.seed}};
}

RfConfig rf_config_from_json(const Json& j, RfConfig c) {
  check_keys(j, {"n_trees", "max_depth", "min_leaf", "max_features", "seed", "threads"}, "rf");
  read(j, "n_trees", c.n_trees);
  read(j, "max_depth", c.max_depth);
  read(j, "min_leaf", c.min_leaf);
  read(j, "max_features", c.max_features);
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  return c;
}

Json pf_to_json(const PfParams& p) {
  return {{"n_particles", p.n_particles}, {"ess_tau", p.ess_tau}, {"predict_sigma", p.predict_sigma}, {"seed", p.seed}};
}

PfParams pf_from_json(const Json& j, PfParams p) {
  check_keys(j, {"n_particles", "ess_tau", "predict_sigma", "seed"}, "pf");
  read(j, "n_particles", p.n_particles);
  read(j, "ess_tau", p.ess_tau);
  read(j, "predict_sigma", p.predict_sigma);
  read(j, "seed", p.seed);
  return p;
}

Json test_to_json(const TestResult& t) {
  return {{"statistic", t.statistic}, {"p_value", t.p_value}, {"n", t.n}, {"exact", t.exact}, {"degenerate", t.degenerate}};
}

}  // namespace

Json pipeline_config_to_json(const PipelineConfig& c) {
  return {{"norm_mode", enum_name(kNormModes, c.norm_mode)},
          {"filter", enum_name(kFilters, c.filter_method)},
          {"q_gamma", c.q_gamma},
          {"pf", pf_to_json(c.pf)},
          {"use_ph", c.use_ph},
          {"rf", rf_config_to_json(c.rf)},
          {"k", c.k},
          {"knn_eps", c.knn_eps},
          {"alpha_grid", c.alpha_grid},
          {"h_grid", c.h_grid},
          {"theta_discount", c.theta_discount},
          {"point_rule", enum_name(kRules, c.point_rule)},
          {"fusion", enum_name(kFusions, c.fusion)},
          {"lambda", c.lambda}};
}

PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig c) {
  return schema_guard("pipeline", [&] {
    check_keys(j, {"norm_mode", "filter", "q_gamma", "pf", "use_ph", "rf", "k", "knn_eps", "alpha_grid", "h_grid",
                   "theta_discount", "point_rule", "fusion", "lambda"},
               "pipeline");
    if (j.contains("norm_mode")) c.norm_mode = enum_value(kNormModes, j["norm_mode"], "norm mode");
    if (j.contains("filter")) c.filter_method = enum_value(kFilters, j["filter"], "filter");
    read(j, "q_gamma", c.q_gamma);
    if (j.contains("pf")) c.pf = pf_from_json(j["pf"], c.pf);
    read(j, "use_ph", c.use_ph);
    if (j.contains("rf")) c.rf = rf_config_from_json(j["rf"], c.rf);
    read(j, "k", c.k);
    read(j, "knn_eps", c.knn_eps);
    read(j, "alpha_grid", c.alpha_grid);
    read(j, "h_grid", c.h_grid);
    read(j, "theta_discount", c.theta_discount);
    if (j.contains("point_rule")) c.point_rule = enum_value(kRules, j["point_rule"], "point rule");
    if (j.contains("fusion")) c.fusion = enum_value(kFusions, j["fusion"], "fusion mode");
    read(j, "lambda", c.lambda);
    return c;
  });
}

SynthSpec synth_spec_from_json(const Json& j, SynthSpec s) {
  return schema_guard("synth", [&] {
    check_keys(j, {"n_rp", "samples_per_rp", "n_wifi", "n_ble", "bounds", "path_loss_exponent", "tx_power_dbm",
                   "shadowing_std_db", "seed"},
               "synth");
    read(j, "n_rp", s.n_rp);
    read(j, "samples_per_rp", s.samples_per_rp);
    read(j, "n_wifi", s.n_wifi);
    read(j, "n_ble", s.n_ble);
    if (j.contains("bounds")) s.bounds = bounds_from_json(j["bounds"]);
    read(j, "path_loss_exponent", s.path_loss_exponent);
    read(j, "tx_power_dbm", s.tx_power_dbm);
    read(j, "shadowing_std_db", s.shadowing_std_db);
    read(j, "seed", s.seed);
    return s;
  });
}

namespace {

Json synth_spec_to_json(const SynthSpec& s) {
  return {{"n_rp", s.n_rp},
          {"samples_per_rp", s.samples_per_rp},
          {"n_wifi", s.n_wifi},
          {"n_ble", s.n_ble},
          {"bounds", bounds_to_json(s.bounds)},
          {"path_loss_exponent", s.path_loss_exponent},
          {"tx_power_dbm", s.tx_power_dbm},
          {"shadowing_std_db", s.shadowing_std_db},
          {"seed", s.seed}};
}

Json split_to_json(const SplitSpec& s) {
  return {{"train", s.train}, {"val", s.val}, {"test", s.test}, {"seed", s.seed}};
}

SplitSpec split_from_json(const Json& j, SplitSpec s) {
  check_keys(j, {"train", "val", "test", "seed"}, "split");
  read(j, "train", s.train);
  read(j, "val", s.val);
  read(j, "test", s.test);
  read(j, "seed", s.seed);
  return s;
}

Json grids_to_json(const CvGrids& g) {
  return {{"q_gamma", g.q_gamma}, {"n_particles", g.n_particles}, {"ess_tau", g.ess_tau}, {"k", g.k},
          {"n_trees", g.n_trees}, {"max_depth", g.max_depth},     {"alpha", g.alpha},     {"h", g.h}};
}

CvGrids grids_from_json(const Json& j, CvGrids g) {
  check_keys(j, {"q_gamma", "n_particles", "ess_tau", "k", "n_trees", "max_depth", "alpha", "h"}, "grids");
  read(j, "q_gamma", g.q_gamma);
  read(j, "n_particles", g.n_particles);
  read(j, "ess_tau", g.ess_tau);
  read(j, "k", g.k);
  read(j, "n_trees", g.n_trees);
  read(j, "max_depth", g.max_depth);
  read(j, "alpha", g.alpha);
  read(j, "h", g.h);
  return g;
}

}  // namespace

NoiseSpec noise_spec_from_json(const Json& j) {
  return schema_guard("noise", [&] {
    check_keys(j, {"kind", "eta", "p", "kappa", "level", "seed"}, "noise");
    NoiseSpec n;
    if (j.contains("kind")) n.kind = enum_value(kNoiseKinds, j["kind"], "noise kind");
    read(j, "eta", n.eta);
    read(j, "p", n.p);
    read(j, "kappa", n.kappa);
    read(j, "level", n.level);
    read(j, "seed", n.seed);
    return n;
  });
}

Json noise_spec_to_json(const NoiseSpec& n) {
  return {{"kind", enum_name(kNoiseKinds, n.kind)}, {"eta", n.eta},     {"p", n.p},
          {"kappa", n.kappa},                       {"level", n.level}, {"seed", n.seed}};
}

void RunConfig::apply_seed(std::uint64_t base) {
  seed = base;
  split.seed = base;
  pipeline.set_seed(base);
  for (auto& n : noise) n.seed = base;
}

void RunConfig::validate() const {
  require(csv.has_value() != synth.has_value(), ErrorKind::Schema,
          "config needs exactly one data source: \"csv\" or \"synth\"");
  require(maps >= 1, ErrorKind::Schema, "maps must be >= 1");
  require(!csv || maps == 1, ErrorKind::Schema, "maps > 1 requires a synthetic data source");
  require(repeats >= 1, ErrorKind::Schema, "repeats must be >= 1");
  require(pipeline.k >= 1, ErrorKind::Schema, "k must be >= 1");
  require(pipeline.rf.n_trees >= 1, ErrorKind::Schema, "rf.n_trees must be >= 1");
  require(pipeline.lambda >= 0.0 && pipeline.lambda <= 1.0, ErrorKind::Schema, "lambda must be in [0, 1]");
  require(pipeline.theta_discount >= 0.0 && pipeline.theta_discount < 1.0, ErrorKind::Schema,
          "theta_discount must be in [0, 1)");
  for (double a : pipeline.alpha_grid) require(a > 0.0, ErrorKind::Schema, "alpha_grid entries must be positive");
  for (double h : pipeline.h_grid) require(h > 0.0, ErrorKind::Schema, "h_grid entries must be positive");
}

RunConfig run_config_from_json(const Json& j) {
  return schema_guard("config", [&] {
    check_keys(j, {"csv", "synth", "maps", "split", "pipeline", "noise", "repeats", "cv", "grids", "folds", "seed"},
               "config");
    RunConfig c;
    if (j.contains("seed")) c.apply_seed(j["seed"].get<std::uint64_t>());
    if (j.contains("csv")) c.csv = j["csv"].get<std::string>();
    if (j.contains("synth")) c.synth = synth_spec_from_json(j["synth"]);
    read(j, "maps", c.maps);
    if (j.contains("split")) c.split = split_from_json(j["split"], c.split);
    if (j.contains("pipeline")) c.pipeline = pipeline_config_from_json(j["pipeline"], c.pipeline);
    if (j.contains("noise")) {
      const Json& n = j["noise"];
      require(n.is_array(), ErrorKind::Schema, "noise must be an array of noise specs");
      c.noise.clear();
      for (const auto& e : n) {
        NoiseSpec spec = noise_spec_from_json(e);
        if (!e.contains("seed")) spec.seed = c.seed;
        c.noise.push_back(spec);
      }
    }
    read(j, "repeats", c.repeats);
    read(j, "cv", c.cv);
    if (j.contains("grids")) c.grids = grids_from_json(j["grids"], c.grids);
    read(j, "folds", c.folds);
    c.validate();
    return c;
  });
}

Json run_config_to_json(const RunConfig& c) {
  Json j;
  if (c.csv) j["csv"] = *c.csv;
  if (c.synth) j["synth"] = synth_spec_to_json(*c.synth);
  j["maps"] = c.maps;
  j["split"] = split_to_json(c.split);
  j["pipeline"] = pipeline_config_to_json(c.pipeline);
  j["noise"] = Json::array();
  for (const auto& n : c.noise) j["noise"].push_back(noise_spec_to_json(n));
  j["repeats"] = c.repeats;
  j["cv"] = c.cv;
  j["grids"] = grids_to_json(c.grids);
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  return j;
}

Json pipeline_to_json(const Pipeline& pl) {
  const auto& fe = pl.frontend;
  const auto& be = pl.backend;
  Json trees = Json::array();
  for (const auto& t : be.rf.trees) trees.push_back(tree_to_json(t));
  std::vector<int> floored(fe.norm.floored.begin(), fe.norm.floored.end());
  return {
      {"version", kArtifactVersion},
      {"config", pipeline_config_to_json(pl.config)},
      {"meta",
       {{"name", pl.meta.name}, {"n_wifi", pl.meta.n_wifi}, {"n_ble", pl.meta.n_ble},
        {"imputed_count", pl.meta.imputed_count}}},
      {"bounds", bounds_to_json(pl.bounds)},
      {"split", split_to_json(pl.split)},
      {"norm",
       {{"mode", enum_name(kNormModes, fe.norm.mode)}, {"mu", fe.norm.mu}, {"sigma", fe.norm.sigma},
        {"floored", floored}}},
      {"channel_variances", {{"var", fe.channel_var.var}, {"shrinkage", fe.channel_var.shrinkage}}},
      {"sigma_dbm", fe.sigma_dbm},
      {"filter",
       {{"method", enum_name(kFilters, fe.filter.method)}, {"q_gamma", fe.filter.q_gamma}, {"r", fe.filter.r},
        {"pf", pf_to_json(fe.filter.pf)},
        {"ukf", {{"alpha", fe.filter.ukf.alpha}, {"beta", fe.filter.ukf.beta}, {"kappa", fe.filter.ukf.kappa}}}}},
      {"ph", {{"enabled", be.use_ph}, {"mu", be.ph_stats.mu}, {"sigma", be.ph_stats.sigma}}},
      {"rf", {{"config", rf_config_to_json(be.rf.config)}, {"n_features", be.rf.n_features}, {"trees", trees}}},
      {"knn",
       {{"k", be.k}, {"eps", be.knn_eps}, {"points", matrix_to_json(be.knn.points())},
        {"labels", positions_to_json(be.knn.labels())},
        {"metric", {{"var", be.knn.metric().var}, {"shrinkage", be.knn.metric().shrinkage}}}}},
      {"dst",
       {{"alpha", be.fusion.alpha}, {"h", be.fusion.h}, {"theta_discount", be.fusion.theta_discount},
        {"beta", be.fusion.beta}, {"rule", enum_name(kRules, be.fusion.rule)}}},
      {"choquet",
       {{"mu1", be.fusion.measure.mu1}, {"mu2", be.fusion.measure.mu2},
        {"identifiable", be.fusion.measure.identifiable}}},
  };
}

Pipeline pipeline_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("version") || !j["version"].is_string())
    fail(ErrorKind::Version, "artifact has no format version tag");
  const auto version = j["version"].get<std::string>();
  if (version != kArtifactVersion)
    fail(ErrorKind::Version, "artifact version '" + version + "' is not supported (expected '" +
                                 std::string(kArtifactVersion) + "')");
  return schema_guard("artifact", [&] {
    Pipeline pl;
    pl.config = pipeline_config_from_json(j.at("config"));
    const Json& meta = j.at("meta");
    pl.meta.name = meta.at("name").get<std::string>();
    pl.meta.n_wifi = meta.at("n_wifi").get<std::size_t>();
    pl.meta.n_ble = meta.at("n_ble").get<std::size_t>();
    pl.meta.imputed_count = meta.at("imputed_count").get<std::size_t>();
    pl.bounds = bounds_from_json(j.at("bounds"));
    pl.split = split_from_json(j.at("split"), {});

    auto& fe = pl.frontend;
    const Json& norm = j.at("norm");
    fe.norm.mode = enum_value(kNormModes, norm.at("mode"), "norm mode");
    fe.norm.mu = norm.at("mu").get<std::vector<double>>();
    fe.norm.sigma = norm.at("sigma").get<std::vector<double>>();
    for (int f : norm.at("floored").get<std::vector<int>>()) fe.norm.floored.push_back(f != 0);
    const std::size_t d = fe.norm.mu.size();
    require(d > 0 && fe.norm.sigma.size() == d && fe.norm.floored.size() == d, ErrorKind::Schema,
            "normalization arrays differ in length");
    fe.channel_var.var = j.at("channel_variances").at("var").get<std::vector<double>>();
    fe.channel_var.shrinkage = j.at("channel_variances").at("shrinkage").get<double>();
    fe.sigma_dbm = j.at("sigma_dbm").get<std::vector<double>>();
    const Json& filt = j.at("filter");
    fe.filter.method = enum_value(kFilters, filt.at("method"), "filter");
    fe.filter.q_gamma = filt.at("q_gamma").get<double>();
    fe.filter.r = filt.at("r").get<std::vector<double>>();
    fe.filter.pf = pf_from_json(filt.at("pf"), {});
    fe.filter.ukf = {filt.at("ukf").at("alpha").get<double>(), filt.at("ukf").at("beta").get<double>(),
                     filt.at("ukf").at("kappa").get<double>()};
    require(fe.channel_var.var.size() == d && fe.sigma_dbm.size() == d && fe.filter.r.size() == d,
            ErrorKind::Schema, "per-channel arrays differ in length");
    fe.filter.validate();

    auto& be = pl.backend;
    const Json& ph = j.at("ph");
    be.use_ph = ph.at("enabled").get<bool>();
    be.ph_stats.mu = ph.at("mu").get<std::vector<double>>();
    be.ph_stats.sigma = ph.at("sigma").get<std::vector<double>>();
    const Json& rf = j.at("rf");
    be.rf.config = rf_config_from_json(rf.at("config"), {});
    be.rf.n_features = rf.at("n_features").get<std::size_t>();
    for (const auto& t : rf.at("trees")) be.rf.trees.push_back(tree_from_json(t, be.rf.n_features));
    require(!be.rf.trees.empty(), ErrorKind::Schema, "artifact forest has no trees");
    const Json& knn = j.at("knn");
    be.k = knn.at("k").get<std::size_t>();
    be.knn_eps = knn.at("eps").get<double>();
    ChannelVariances metric;
    metric.var = knn.at("metric").at("var").get<std::vector<double>>();
    metric.shrinkage = knn.at("metric").at("shrinkage").get<double>();
    be.knn = KnnIndex(matrix_from_json(knn.at("points")), positions_from_json(knn.at("labels")), metric);
    const std::size_t width = d + (be.use_ph ? kPhFeatureCount : 0);
    require(be.knn.dim() == width && be.rf.n_features == width, ErrorKind::Schema,
            "stored feature width does not match the channel count");
    const Json& dst = j.at("dst");
    be.fusion.alpha = dst.at("alpha").get<double>();
    be.fusion.h = dst.at("h").get<double>();
    be.fusion.theta_discount = dst.at("theta_discount").get<double>();
    be.fusion.beta = dst.at("beta").get<double>();
    be.fusion.rule = enum_value(kRules, dst.at("rule"), "point rule");
    const Json& cq = j.at("choquet");
    be.fusion.measure = {cq.at("mu1").get<double>(), cq.at("mu2").get<double>(), cq.at("identifiable").get<bool>()};
    be.grid = make_grid(pl.bounds, be.fusion.h);
    return pl;
  });
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorKind::Io, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::Io, "cannot move artifact into place at '" + path.string() + "'");
  }
}

void save_pipeline(const Pipeline& pipeline, const std::filesystem::path& path) {
  write_text_atomic(path, pipeline_to_json(pipeline).dump() + "\n");
}

Pipeline load_pipeline(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open artifact '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, "artifact '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return pipeline_from_json(j);
}

Json report_to_json(const EvalReport& r) {
  Json ci = Json::array();
  for (std::size_t v = 0; v < r.ci.size(); ++v) {
    Json row = Json::array();
    for (const auto& c : r.ci[v])
      row.push_back({{"mean", c.mean}, {"half_width", c.half_width}, {"lower", c.lower}, {"upper", c.upper}});
    ci.push_back(row);
  }
  Json cmp = Json::array();
  for (const auto& c : r.comparisons)
    cmp.push_back({{"condition", c.condition},
                   {"baseline", c.baseline},
                   {"candidate", c.candidate},
                   {"wilcoxon_samples", test_to_json(c.wilcoxon_samples)},
                   {"wilcoxon_splits", test_to_json(c.wilcoxon_splits)},
                   {"t_splits", test_to_json(c.t_splits)},
                   {"holm_samples", c.holm_samples},
                   {"holm_splits", c.holm_splits},
                   {"reject_samples", c.reject_samples},
                   {"reject_splits", c.reject_splits}});
  Json mean_rmse = Json::object();
  for (std::size_t v = 0; v < r.variants.size(); ++v)
    for (std::size_t c = 0; c < r.conditions.size(); ++c)
      mean_rmse[r.variants[v]][r.conditions[c]] = r.mean_rmse(v, c);
  return {{"variants", r.variants},
          {"conditions", r.conditions},
          {"mean_rmse", mean_rmse},
          {"rmse", r.rmse},
          {"alternatives", r.alternatives},
          {"canonical_errors", r.canonical_errors},
          {"ci", ci},
          {"comparisons", cmp},
          {"runtime_s", r.runtime_s},
          {"selected_rules", r.selected_rules}};
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
  write_text_atomic(path, dump_json(report_to_json(report)));
}

}  // namespace fpfuse
