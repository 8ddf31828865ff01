#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fpfuse {

enum class ChannelKind : std::uint8_t { Wifi, Ble };

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

double distance(Position a, Position b);

// Axis-aligned floor rectangle in meters.
struct Bounds {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool contains(Position p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct Fingerprint {
  std::vector<double> rss;  // dBm, Wi-Fi channels first then BLE
};

struct Sample {
  Fingerprint fingerprint;
  Position position;
  std::int64_t rp_id = 0;
};

struct MapMeta {
  std::string name;
  std::size_t n_wifi = 0;
  std::size_t n_ble = 0;
  std::size_t imputed_count = 0;

  std::size_t dim() const { return n_wifi + n_ble; }
};

// Labelled survey. All fingerprints share the channel layout in `meta`.
struct RadioMap {
  std::vector<Sample> samples;
  Bounds bounds;
  MapMeta meta;

  std::size_t dim() const { return meta.dim(); }
  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  ChannelKind kind(std::size_t channel) const {
    return channel < meta.n_wifi ? ChannelKind::Wifi : ChannelKind::Ble;
  }
  std::vector<Position> positions() const;

  // Throws Error(Schema) if any invariant is broken.
  void validate() const;
};

// Sentinel written for missing RSS cells.
inline constexpr double kMissingRssDbm = -100.0;
inline constexpr double kMinRssDbm = -120.0;
inline constexpr double kMaxRssDbm = 0.0;

}  // namespace fpfuse
