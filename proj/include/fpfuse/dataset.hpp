#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <tuple>

#include "fpfuse/types.hpp"

namespace fpfuse {

// Expected CSV layout. Unset counts are inferred from the header.
struct CsvSchema {
  std::optional<std::size_t> n_wifi;
  std::optional<std::size_t> n_ble;
  std::optional<Bounds> bounds;  // overrides any bounds comment in the file
};

// Reads `rp_id,x,y,wifi_1..wifi_N,ble_1..ble_M`. Empty RSS cells become
// kMissingRssDbm and are counted in meta.imputed_count. An optional leading
// comment `# bounds=x0,y0,x1,y1` fixes the floor rectangle; otherwise the
// bounding box of the positions padded by 0.5 m is used.
RadioMap load_radio_map(const std::filesystem::path& path, const CsvSchema& schema = {});

void save_radio_map(const RadioMap& map, const std::filesystem::path& path);

struct SynthSpec {
  std::size_t n_rp = 15;
  std::size_t samples_per_rp = 80;
  std::size_t n_wifi = 7;
  std::size_t n_ble = 3;
  Bounds bounds{0.0, 0.0, 6.0, 14.0};
  double path_loss_exponent = 3.0;
  double tx_power_dbm = -40.0;  // received power at the 1 m reference distance
  double shadowing_std_db = 1.0;
  std::uint64_t seed = 1;
};

struct Anchor {
  Position position;
  ChannelKind kind = ChannelKind::Wifi;
};

// Single-slope log-distance model: tx - 10 n log10(max(dist, 1 m)), without
// shadowing. Exposed for tests and for the generator itself.
double path_loss_rss(double tx_power_dbm, double exponent, double dist_m);

// Anchor layout used by synth_radio_map for a given spec.
std::vector<Anchor> synth_anchors(const SynthSpec& spec);

RadioMap synth_radio_map(const SynthSpec& spec);

struct SplitSpec {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  std::uint64_t seed = 123;
};

struct SplitResult {
  RadioMap train;
  RadioMap val;
  RadioMap test;
};

// Per-RP shuffle, floor(n*ratio) samples to val and test, remainder to train.
// Each part keeps original sample order.
SplitResult stratified_split(const RadioMap& map, const SplitSpec& spec);

// Consecutive runs of equal rp_id, as [begin, end) index pairs. Used as the
// temporal streams fed to the per-channel filters.
std::vector<std::pair<std::size_t, std::size_t>> rp_segments(const RadioMap& map);

RadioMap subset(const RadioMap& map, std::span<const std::size_t> indices);

}  // namespace fpfuse
