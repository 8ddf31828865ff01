#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpfuse/harness.hpp"
#include "fpfuse/pipeline.hpp"

namespace fpfuse {

using Json = nlohmann::json;

Json pipeline_to_json(const Pipeline& pipeline);
// Throws Error(Version) when the format tag does not match kArtifactVersion.
Pipeline pipeline_from_json(const Json& j);

// Writes to a temporary sibling and renames, so a failed write never leaves
// a partial artifact behind.
void save_pipeline(const Pipeline& pipeline, const std::filesystem::path& path);
Pipeline load_pipeline(const std::filesystem::path& path);

std::string dump_json(const Json& j);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

// Everything a CLI run needs. Exactly one data source.
struct RunConfig {
  std::optional<std::string> csv;
  std::optional<SynthSpec> synth;
  std::size_t maps = 1;  // >1: one synthetic map per repeat, seeds synth.seed + r
  SplitSpec split;
  PipelineConfig pipeline;
  std::vector<NoiseSpec> noise{NoiseSpec{}};
  std::size_t repeats = 10;
  bool cv = false;
  CvGrids grids;
  std::size_t folds = 5;
  std::uint64_t seed = 123;

  // Split, RF, PF and noise seeds all follow one base seed.
  void apply_seed(std::uint64_t base);
  void validate() const;
};

// Keys not present keep their defaults; unknown keys are rejected. A top-level
// "seed" is applied before the sections, so explicit section seeds win.
RunConfig run_config_from_json(const Json& j);
Json run_config_to_json(const RunConfig& config);

PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig base = {});
Json pipeline_config_to_json(const PipelineConfig& config);

SynthSpec synth_spec_from_json(const Json& j, SynthSpec base = {});
NoiseSpec noise_spec_from_json(const Json& j);
Json noise_spec_to_json(const NoiseSpec& spec);

Json report_to_json(const EvalReport& report);

}  // namespace fpfuse
