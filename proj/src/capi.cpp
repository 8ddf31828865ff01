#include "fpfuse/fpfuse.h"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "fpfuse/artifact.hpp"
#include "fpfuse/bench.hpp"
#include "fpfuse/dataset.hpp"
#include "fpfuse/error.hpp"
#include "fpfuse/harness.hpp"
#include "fpfuse/pipeline.hpp"

using namespace fpfuse;

struct fpf_pipeline {
  Pipeline pipeline;
  std::optional<Pipeline::Stream> stream;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_stage;

fpf_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return FPF_ERR_IO;
    case ErrorKind::Parse: return FPF_ERR_PARSE;
    case ErrorKind::Schema: return FPF_ERR_SCHEMA;
    case ErrorKind::Dimension: return FPF_ERR_DIMENSION;
    case ErrorKind::Precondition: return FPF_ERR_PRECONDITION;
    case ErrorKind::Conflict: return FPF_ERR_CONFLICT;
    case ErrorKind::Version: return FPF_ERR_VERSION;
    case ErrorKind::Numeric: return FPF_ERR_NUMERIC;
  }
  return FPF_ERR_INTERNAL;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Fn>
fpf_status guarded(Fn&& fn) {
  g_error.clear();
  g_stage.clear();
  try {
    fn();
    return FPF_OK;
  } catch (const StageError& e) {
    g_error = e.what();
    g_stage = e.stage();
    return status_of(e.kind());
  } catch (const Error& e) {
    g_error = e.what();
    return status_of(e.kind());
  } catch (const UsageError& e) {
    g_error = e.what();
    return FPF_ERR_USAGE;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return FPF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return FPF_ERR_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    return FPF_ERR_INTERNAL;
  }
}

// Runs fn, tagging any library error with the stage name.
template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.kind(), e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) throw UsageError(std::string(what) + " must not be NULL");
}

RunConfig parse_config(const char* config_json) {
  need(config_json, "config_json");
  return stage("config", [&] {
    Json j;
    try {
      j = Json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::Parse, std::string("config is not valid JSON: ") + e.what());
    }
    return run_config_from_json(j);
  });
}

std::vector<RadioMap> load_maps(const RunConfig& cfg) {
  return stage("ingest", [&] {
    std::vector<RadioMap> maps;
    if (cfg.csv) {
      maps.push_back(load_radio_map(*cfg.csv));
    } else {
      for (std::size_t r = 0; r < cfg.maps; ++r) {
        SynthSpec s = *cfg.synth;
        s.seed += r;
        maps.push_back(synth_radio_map(s));
      }
    }
    for (const auto& m : maps) m.validate();
    return maps;
  });
}

PipelineConfig select_config(const RunConfig& cfg, const RadioMap& train) {
  if (!cfg.cv) return cfg.pipeline;
  return stage("cv", [&] { return cv_grid_search(train, cfg.grids, cfg.pipeline, cfg.folds, cfg.seed).config; });
}

void write_report(const EvalReport& report, const std::filesystem::path& dir, const std::string& name) {
  stage("write", [&] {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
    write_report_json(report, dir / (name + ".json"));
    write_report_csv(report, dir / (name + ".csv"));
    std::string table;
    for (std::size_t c = 0; c < report.conditions.size(); ++c)
      table += "# " + report.conditions[c] + "\n" + format_ci_table(report, c) + "\n";
    write_text_atomic(dir / (name + "_ci.txt"), table);
    return 0;
  });
}

EvalReport run_ladder(const RunConfig& cfg, std::vector<NoiseSpec> noise) {
  const auto maps = load_maps(cfg);
  LadderConfig lc;
  lc.pipeline = cfg.pipeline;
  if (cfg.cv) {
    const SplitResult parts = stage("split", [&] { return stratified_split(maps[0], cfg.split); });
    lc.pipeline = select_config(cfg, parts.train);
  }
  lc.split = cfg.split;
  lc.noise = std::move(noise);
  lc.repeats = cfg.repeats;
  return stage("evaluate", [&] { return run_ablation_ladder(maps, lc); });
}

void fill(const Prediction& p, fpf_prediction* out) {
  out->x = p.position.x;
  out->y = p.position.y;
  out->rf_x = p.detail.rf.x;
  out->rf_y = p.detail.rf.y;
  out->knn_x = p.detail.knn.x;
  out->knn_y = p.detail.knn.y;
  out->cell = p.detail.cell;
  out->cell_x = p.detail.dst_centroid.x;
  out->cell_y = p.detail.dst_centroid.y;
  out->s_rf = p.detail.s_rf;
  out->s_knn = p.detail.s_knn;
  out->choquet = p.detail.choquet;
}

std::pair<FusionMode, double> resolve(const Pipeline& pl, const fpf_predict_options* o) {
  FusionMode mode = pl.config.fusion;
  double lambda = pl.config.lambda;
  if (!o) return {mode, lambda};
  switch (o->fusion) {
    case FPF_FUSION_DEFAULT: break;
    case FPF_FUSION_DST: mode = FusionMode::Dst; break;
    case FPF_FUSION_CHOQUET: mode = FusionMode::Choquet; break;
    case FPF_FUSION_CONVEX: mode = FusionMode::Convex; break;
    default: throw UsageError("unknown fusion mode");
  }
  if (o->lambda >= 0.0) {
    if (o->lambda > 1.0) throw UsageError("lambda must be in [0, 1]");
    lambda = o->lambda;
  }
  return {mode, lambda};
}

}  // namespace

extern "C" {

const char* fpf_version(void) { return "fpfuse 1.0.0"; }
const char* fpf_last_error(void) { return g_error.c_str(); }
const char* fpf_last_error_stage(void) { return g_stage.c_str(); }

const char* fpf_status_name(fpf_status status) {
  switch (status) {
    case FPF_OK: return "ok";
    case FPF_ERR_IO: return "io";
    case FPF_ERR_PARSE: return "parse";
    case FPF_ERR_SCHEMA: return "schema";
    case FPF_ERR_DIMENSION: return "dimension";
    case FPF_ERR_PRECONDITION: return "precondition";
    case FPF_ERR_CONFLICT: return "conflict";
    case FPF_ERR_VERSION: return "version";
    case FPF_ERR_NUMERIC: return "numeric";
    case FPF_ERR_USAGE: return "usage";
    case FPF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

fpf_status fpf_synth(const char* spec_json, const char* out_csv) {
  return guarded([&] {
    need(out_csv, "out_csv");
    const SynthSpec spec = stage("config", [&] {
      if (!spec_json) return SynthSpec{};
      Json j;
      try {
        j = Json::parse(spec_json);
      } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::Parse, std::string("synth spec is not valid JSON: ") + e.what());
      }
      return synth_spec_from_json(j);
    });
    const RadioMap map = stage("synth", [&] { return synth_radio_map(spec); });
    stage("write", [&] {
      save_radio_map(map, out_csv);
      return 0;
    });
  });
}

fpf_status fpf_fit(const char* config_json, const char* artifact_path) {
  return guarded([&] {
    need(artifact_path, "artifact_path");
    const RunConfig cfg = parse_config(config_json);
    const auto maps = load_maps(cfg);
    const SplitResult parts = stage("split", [&] { return stratified_split(maps[0], cfg.split); });
    const PipelineConfig pcfg = select_config(cfg, parts.train);
    Pipeline pl = stage("fit", [&] { return Pipeline::fit(parts.train, parts.val, pcfg); });
    pl.split = cfg.split;
    pl.bounds = maps[0].bounds;
    pl.meta = maps[0].meta;
    stage("write", [&] {
      save_pipeline(pl, artifact_path);
      return 0;
    });
  });
}

fpf_status fpf_pipeline_load(const char* artifact_path, fpf_pipeline** out) {
  return guarded([&] {
    need(artifact_path, "artifact_path");
    need(out, "out");
    *out = nullptr;
    auto p = std::make_unique<fpf_pipeline>();
    p->pipeline = stage("load", [&] { return load_pipeline(artifact_path); });
    *out = p.release();
  });
}

void fpf_pipeline_free(fpf_pipeline* pipeline) { delete pipeline; }

size_t fpf_pipeline_dim(const fpf_pipeline* pipeline) { return pipeline ? pipeline->pipeline.dim() : 0; }

fpf_status fpf_pipeline_predict(const fpf_pipeline* pipeline, const double* scan, size_t d,
                                const fpf_predict_options* options, fpf_prediction* out) {
  return guarded([&] {
    need(pipeline, "pipeline");
    need(scan, "scan");
    need(out, "out");
    const auto [mode, lambda] = resolve(pipeline->pipeline, options);
    const Prediction p =
        stage("predict", [&] { return pipeline->pipeline.predict(std::span<const double>(scan, d), mode, lambda); });
    fill(p, out);
  });
}

fpf_status fpf_pipeline_stream_push(fpf_pipeline* pipeline, const double* scan, size_t d,
                                    const fpf_predict_options* options, fpf_prediction* out) {
  return guarded([&] {
    need(pipeline, "pipeline");
    need(scan, "scan");
    need(out, "out");
    const auto [mode, lambda] = resolve(pipeline->pipeline, options);
    if (!pipeline->stream) pipeline->stream.emplace(pipeline->pipeline);
    const Prediction p =
        stage("predict", [&] { return pipeline->stream->push(std::span<const double>(scan, d), mode, lambda); });
    fill(p, out);
  });
}

fpf_status fpf_pipeline_stream_reset(fpf_pipeline* pipeline) {
  return guarded([&] {
    need(pipeline, "pipeline");
    pipeline->stream.reset();
  });
}

fpf_status fpf_pipeline_belief_map(const fpf_pipeline* pipeline, const double* scan, size_t d, const char* csv_path,
                                   const char* pgm_path) {
  return guarded([&] {
    need(pipeline, "pipeline");
    need(scan, "scan");
    const Pipeline& pl = pipeline->pipeline;
    const Bba m = stage("predict", [&] { return pl.belief(pl.predict(std::span<const double>(scan, d))); });
    stage("write", [&] {
      if (csv_path) write_belief_csv(m, pl.backend.grid, csv_path);
      if (pgm_path) write_belief_pgm(m, pl.backend.grid, pgm_path);
      return 0;
    });
  });
}

fpf_status fpf_ablate(const char* config_json, const char* out_dir) {
  return guarded([&] {
    need(out_dir, "out_dir");
    const RunConfig cfg = parse_config(config_json);
    write_report(run_ladder(cfg, cfg.noise), out_dir, "ablation");
  });
}

fpf_status fpf_noise_sweep(const char* config_json, const char* kind, const char* out_dir) {
  return guarded([&] {
    need(kind, "kind");
    need(out_dir, "out_dir");
    const RunConfig cfg = parse_config(config_json);
    const std::string k = kind;
    std::vector<NoiseSpec> grid;
    auto base = [&](NoiseKind nk) {
      NoiseSpec s;
      s.kind = nk;
      s.seed = cfg.seed;
      return s;
    };
    if (k == "gauss_jitter") {
      for (double eta : {0.05, 0.10, 0.20}) {
        NoiseSpec s = base(NoiseKind::GaussJitter);
        s.eta = eta;
        grid.push_back(s);
      }
    } else if (k == "bursty") {
      for (double p : {0.02, 0.05})
        for (double kappa : {2.0, 3.0}) {
          NoiseSpec s = base(NoiseKind::Bursty);
          s.p = p;
          s.kappa = kappa;
          grid.push_back(s);
        }
    } else if (k == "dbm_10pct") {
      for (double level : {0.05, 0.10, 0.20}) {
        NoiseSpec s = base(NoiseKind::Dbm10Pct);
        s.level = level;
        grid.push_back(s);
      }
    } else {
      throw UsageError("unknown noise kind '" + k + "' (expected gauss_jitter, bursty or dbm_10pct)");
    }
    write_report(run_ladder(cfg, grid), out_dir, "noise_sweep_" + k);
  });
}

fpf_status fpf_bench(const fpf_pipeline* pipeline, size_t n_queries, uint64_t seed, const char* out_json) {
  return guarded([&] {
    need(pipeline, "pipeline");
    need(out_json, "out_json");
    const BenchReport rep = stage("bench", [&] { return run_bench(pipeline->pipeline, n_queries, seed); });
    Json stages = Json::object();
    for (const auto& s : rep.stages) stages[s.stage] = s.median_ns;
    Json scaling = Json::array();
    for (const auto& s : rep.scaling)
      scaling.push_back({{"parameter", s.parameter}, {"values", s.values}, {"median_ns", s.median_ns}, {"slope", s.slope}});
    const Json j{{"n_queries", rep.n_queries},
                 {"stage_median_ns", stages},
                 {"scaling", scaling},
                 {"filter_ns", {{"none", rep.none_filter_ns}, {"kf", rep.kf_filter_ns}, {"pf_10000", rep.pf_filter_ns}}},
                 {"pf_kf_ratio", rep.pf_kf_ratio}};
    stage("write", [&] {
      write_text_atomic(out_json, dump_json(j));
      return 0;
    });
  });
}

}  // extern "C"
