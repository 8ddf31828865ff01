// Command-line front end. Talks to the library only through fpfuse.h.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "fpfuse/fpfuse.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct CliError {
  int code;
  std::string message;
};

int exit_code(fpf_status s) {
  switch (s) {
    case FPF_OK: return kExitOk;
    case FPF_ERR_IO:
    case FPF_ERR_PARSE:
    case FPF_ERR_SCHEMA:
    case FPF_ERR_DIMENSION:
    case FPF_ERR_PRECONDITION:
    case FPF_ERR_VERSION:
    case FPF_ERR_USAGE: return kExitUsage;
    default: return kExitInternal;
  }
}

void check(fpf_status s) {
  if (s == FPF_OK) return;
  // Stage failures already carry "<stage>: " in the message.
  const std::string msg = std::string(fpf_status_name(s)) + " error: " + fpf_last_error();
  throw CliError{exit_code(s), msg};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitUsage, "cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw CliError{kExitUsage, what + " is not valid JSON: " + e.what()};
  }
}

std::vector<double> parse_scan(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (used == 0 || used != cell.size()) throw CliError{kExitUsage, "bad scan value '" + cell + "'"};
    out.push_back(v);
  }
  if (out.empty()) throw CliError{kExitUsage, "empty scan"};
  return out;
}

// One scan per non-empty, non-comment line.
std::vector<std::vector<double>> read_scans(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(parse_scan(line));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string prediction_line(const fpf_prediction& p) {
  std::ostringstream os;
  os << "{\"x\":" << fmt(p.x) << ",\"y\":" << fmt(p.y) << ",\"cell\":" << p.cell << ",\"cell_xy\":["
     << fmt(p.cell_x) << ',' << fmt(p.cell_y) << "],\"rf\":[" << fmt(p.rf_x) << ',' << fmt(p.rf_y)
     << "],\"knn\":[" << fmt(p.knn_x) << ',' << fmt(p.knn_y) << "],\"s_rf\":" << fmt(p.s_rf)
     << ",\"s_knn\":" << fmt(p.s_knn) << ",\"choquet\":" << fmt(p.choquet) << '}';
  return os.str();
}

fpf_fusion fusion_from(const std::string& name) {
  if (name.empty()) return FPF_FUSION_DEFAULT;
  if (name == "dst") return FPF_FUSION_DST;
  if (name == "choquet") return FPF_FUSION_CHOQUET;
  if (name == "convex") return FPF_FUSION_CONVEX;
  throw CliError{kExitUsage, "unknown fusion mode '" + name + "'"};
}

struct Pipeline {
  fpf_pipeline* p = nullptr;
  explicit Pipeline(const std::string& path) { check(fpf_pipeline_load(path.c_str(), &p)); }
  ~Pipeline() { fpf_pipeline_free(p); }
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;
};

// Writes <stem>.csv and <stem>.pgm for a path given with or without either
// extension.
void belief_map(const fpf_pipeline* p, const std::vector<double>& scan, const std::string& target) {
  fs::path stem(target);
  if (stem.extension() == ".pgm" || stem.extension() == ".csv") stem.replace_extension();
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  const std::string csv = stem.string() + ".csv";
  const std::string pgm = stem.string() + ".pgm";
  check(fpf_pipeline_belief_map(p, scan.data(), scan.size(), csv.c_str(), pgm.c_str()));
  std::cerr << "belief map: " << csv << ", " << pgm << '\n';
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = ".";
};

json load_config(const Globals& g, const std::string& data) {
  json cfg = g.config.empty() ? json::object() : parse_json(read_file(g.config), "config '" + g.config + "'");
  if (!cfg.is_object()) throw CliError{kExitUsage, "config must be a JSON object"};
  if (!data.empty()) {
    cfg.erase("synth");
    cfg["csv"] = data;
  }
  if (!cfg.contains("csv") && !cfg.contains("synth")) cfg["synth"] = json::object();
  if (g.seed) cfg["seed"] = *g.seed;
  return cfg;
}

fs::path out_dir(const Globals& g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError{kExitUsage, "cannot create output directory '" + g.out + "'"};
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor fingerprint localization: filtering, RF + wKNN regression, evidential fusion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fpf_version()));

  Globals g;
  app.add_option("--seed", g.seed, "Base seed for splits, forests, particles and noise");
  app.add_option("--config", g.config, "JSON run configuration file");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  std::string data, artifact = "artifact.json", scan, scans, fusion, belief, kind = "gauss_jitter";
  double lambda = -1.0;
  bool stream = false;
  std::size_t queries = 200;

  auto* fit = app.add_subcommand("fit", "Calibrate and train a pipeline, write <out>/artifact.json");
  fit->add_option("--data", data, "Radio map CSV (overrides the config data source)");

  auto* predict = app.add_subcommand("predict", "Localize raw dBm scans with a trained artifact");
  predict->add_option("--artifact", artifact, "Artifact path")->capture_default_str();
  predict->add_option("--scan", scan, "Comma-separated raw dBm values");
  predict->add_option("--scans", scans, "File with one comma-separated scan per line");
  predict->add_flag("--stream", stream, "Keep filter state across the scans");
  predict->add_option("--fusion", fusion, "dst, choquet or convex");
  predict->add_option("--lambda", lambda, "RF weight for convex fusion");
  predict->add_option("--belief-map", belief, "Write belief map of the last scan to <path>.csv/.pgm");

  auto* ablate = app.add_subcommand("ablate", "Four-variant ablation ladder with significance tests");
  ablate->add_option("--data", data, "Radio map CSV (overrides the config data source)");

  auto* sweep = app.add_subcommand("noise-sweep", "Ablation ladder over a noise grid");
  sweep->add_option("--data", data, "Radio map CSV (overrides the config data source)");
  sweep->add_option("--kind", kind, "gauss_jitter, bursty or dbm_10pct")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Per-stage latency and scaling report");
  bench->add_option("--artifact", artifact, "Artifact path")->capture_default_str();
  bench->add_option("--queries", queries, "Number of timed queries")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write a synthetic radio map to <out>/radio_map.csv");

  auto* exportb = app.add_subcommand("export-belief-map", "Write <out>/belief.csv and <out>/belief.pgm for one scan");
  exportb->add_option("--artifact", artifact, "Artifact path")->capture_default_str();
  exportb->add_option("--scan", scan, "Comma-separated raw dBm values")->required();

  for (auto* sub : {fit, predict, ablate, sweep, bench, synth, exportb}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) {
      json spec = g.config.empty() ? json::object() : parse_json(read_file(g.config), "config '" + g.config + "'");
      if (spec.contains("synth")) spec = spec["synth"];
      if (g.seed) spec["seed"] = *g.seed;
      const auto path = (out_dir(g) / "radio_map.csv").string();
      check(fpf_synth(spec.dump().c_str(), path.c_str()));
      std::cout << path << '\n';
    } else if (*fit) {
      const json cfg = load_config(g, data);
      const auto path = (out_dir(g) / "artifact.json").string();
      check(fpf_fit(cfg.dump().c_str(), path.c_str()));
      std::cout << path << '\n';
    } else if (*predict) {
      if (scan.empty() == scans.empty()) throw CliError{kExitUsage, "predict needs exactly one of --scan or --scans"};
      std::vector<std::vector<double>> batch;
      if (scan.empty()) batch = read_scans(scans);
      else batch.push_back(parse_scan(scan));
      if (batch.empty()) throw CliError{kExitUsage, "no scans in '" + scans + "'"};
      const fpf_predict_options opts{fusion_from(fusion), lambda};
      Pipeline p(artifact);
      for (const auto& s : batch) {
        fpf_prediction out{};
        check(stream ? fpf_pipeline_stream_push(p.p, s.data(), s.size(), &opts, &out)
                     : fpf_pipeline_predict(p.p, s.data(), s.size(), &opts, &out));
        std::cout << prediction_line(out) << '\n';
      }
      if (!belief.empty()) belief_map(p.p, batch.back(), belief);
    } else if (*ablate) {
      const json cfg = load_config(g, data);
      check(fpf_ablate(cfg.dump().c_str(), out_dir(g).string().c_str()));
      std::cout << read_file((out_dir(g) / "ablation_ci.txt").string());
    } else if (*sweep) {
      const json cfg = load_config(g, data);
      check(fpf_noise_sweep(cfg.dump().c_str(), kind.c_str(), out_dir(g).string().c_str()));
      std::cout << read_file((out_dir(g) / ("noise_sweep_" + kind + "_ci.txt")).string());
    } else if (*bench) {
      Pipeline p(artifact);
      const auto path = (out_dir(g) / "bench.json").string();
      check(fpf_bench(p.p, queries, g.seed.value_or(123), path.c_str()));
      std::cout << read_file(path);
    } else if (*exportb) {
      Pipeline p(artifact);
      belief_map(p.p, parse_scan(scan), (out_dir(g) / "belief").string());
    }
  } catch (const CliError& e) {
    std::cerr << "fpfuse: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "fpfuse: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
