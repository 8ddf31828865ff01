#include "fpfuse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "fpfuse/error.hpp"
#include "fpfuse/rng.hpp"

namespace fpfuse {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& cell, std::size_t line, const char* column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    fail(ErrorKind::Parse, "line " + std::to_string(line) + ": cannot parse " + column + " value '" + cell + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Returns the count of a `<prefix>_<k>` run starting at `begin`.
std::size_t count_prefixed(const std::vector<std::string>& header, std::size_t begin, const std::string& prefix) {
  std::size_t n = 0;
  while (begin + n < header.size() && header[begin + n] == prefix + "_" + std::to_string(n + 1)) ++n;
  return n;
}

Bounds parse_bounds_comment(const std::string& line, std::size_t line_no) {
  auto pos = line.find("bounds=");
  std::string rest = line.substr(pos + 7);
  rest = rest.substr(0, rest.find_first_of(" \t"));
  auto cells = split_csv_line(rest);
  if (cells.size() != 4) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bounds needs 4 values");
  Bounds b{parse_double(trim(cells[0]), line_no, "bounds"), parse_double(trim(cells[1]), line_no, "bounds"),
           parse_double(trim(cells[2]), line_no, "bounds"), parse_double(trim(cells[3]), line_no, "bounds")};
  return b;
}

}  // namespace

RadioMap load_radio_map(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");

  RadioMap map;
  map.meta.name = path.stem().string();
  std::optional<Bounds> file_bounds;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      if (line.find("bounds=") != std::string::npos) file_bounds = parse_bounds_comment(line, line_no);
      auto name_pos = line.find("name=");
      if (name_pos != std::string::npos) {
        std::string name = line.substr(name_pos + 5);
        map.meta.name = name.substr(0, name.find_first_of(" \t"));
      }
      continue;
    }
    for (auto& cell : split_csv_line(line)) header.push_back(trim(cell));
    break;
  }
  if (header.size() < 4 || header[0] != "rp_id" || header[1] != "x" || header[2] != "y")
    fail(ErrorKind::Schema, "header must start with rp_id,x,y followed by RSS columns");

  const std::size_t n_wifi = count_prefixed(header, 3, "wifi");
  const std::size_t n_ble = count_prefixed(header, 3 + n_wifi, "ble");
  if (3 + n_wifi + n_ble != header.size())
    fail(ErrorKind::Schema, "unexpected header column '" + header[3 + n_wifi + n_ble] + "'");
  if (n_wifi + n_ble == 0) fail(ErrorKind::Schema, "header has no RSS columns");
  if (schema.n_wifi && *schema.n_wifi != n_wifi)
    fail(ErrorKind::Schema, "expected " + std::to_string(*schema.n_wifi) + " wifi columns, header has " +
                                std::to_string(n_wifi));
  if (schema.n_ble && *schema.n_ble != n_ble)
    fail(ErrorKind::Schema, "expected " + std::to_string(*schema.n_ble) + " ble columns, header has " +
                                std::to_string(n_ble));
  map.meta.n_wifi = n_wifi;
  map.meta.n_ble = n_ble;
  const std::size_t d = n_wifi + n_ble;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 3 + d)
      fail(ErrorKind::Schema, "line " + std::to_string(line_no) + ": row has " + std::to_string(cells.size() - 3) +
                                  " RSS columns, schema has d=" + std::to_string(d));
    Sample s;
    const std::string rp = trim(cells[0]);
    std::int64_t rp_id = 0;
    auto [ptr, ec] = std::from_chars(rp.data(), rp.data() + rp.size(), rp_id);
    if (ec != std::errc() || ptr != rp.data() + rp.size())
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": cannot parse rp_id '" + rp + "'");
    s.rp_id = rp_id;
    s.position = {parse_double(trim(cells[1]), line_no, "x"), parse_double(trim(cells[2]), line_no, "y")};
    s.fingerprint.rss.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
      const std::string cell = trim(cells[3 + c]);
      if (cell.empty()) {
        s.fingerprint.rss[c] = kMissingRssDbm;
        ++map.meta.imputed_count;
      } else {
        s.fingerprint.rss[c] = parse_double(cell, line_no, "rss");
      }
    }
    map.samples.push_back(std::move(s));
  }
  if (map.samples.empty()) fail(ErrorKind::Schema, "'" + path.string() + "' has no data rows");

  if (schema.bounds) {
    map.bounds = *schema.bounds;
  } else if (file_bounds) {
    map.bounds = *file_bounds;
  } else {
    Bounds b{map.samples[0].position.x, map.samples[0].position.y, map.samples[0].position.x,
             map.samples[0].position.y};
    for (const auto& s : map.samples) {
      b.x_min = std::min(b.x_min, s.position.x);
      b.y_min = std::min(b.y_min, s.position.y);
      b.x_max = std::max(b.x_max, s.position.x);
      b.y_max = std::max(b.y_max, s.position.y);
    }
    constexpr double pad = 0.5;
    map.bounds = {b.x_min - pad, b.y_min - pad, b.x_max + pad, b.y_max + pad};
  }
  map.validate();
  return map;
}

void save_radio_map(const RadioMap& map, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# bounds=" << format_double(map.bounds.x_min) << ',' << format_double(map.bounds.y_min) << ','
      << format_double(map.bounds.x_max) << ',' << format_double(map.bounds.y_max);
  if (!map.meta.name.empty()) out << " name=" << map.meta.name;
  out << '\n' << "rp_id,x,y";
  for (std::size_t i = 1; i <= map.meta.n_wifi; ++i) out << ",wifi_" << i;
  for (std::size_t i = 1; i <= map.meta.n_ble; ++i) out << ",ble_" << i;
  out << '\n';
  for (const auto& s : map.samples) {
    out << s.rp_id << ',' << format_double(s.position.x) << ',' << format_double(s.position.y);
    for (double v : s.fingerprint.rss) out << ',' << format_double(v);
    out << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  file << out.str();
  if (!file) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

double path_loss_rss(double tx_power_dbm, double exponent, double dist_m) {
  return tx_power_dbm - 10.0 * exponent * std::log10(std::max(dist_m, 1.0));
}

std::vector<Anchor> synth_anchors(const SynthSpec& spec) {
  Rng rng(derive_seed(spec.seed, {0xA}));
  std::uniform_real_distribution<double> ux(spec.bounds.x_min, spec.bounds.x_max);
  std::uniform_real_distribution<double> uy(spec.bounds.y_min, spec.bounds.y_max);
  std::vector<Anchor> anchors;
  for (std::size_t i = 0; i < spec.n_wifi + spec.n_ble; ++i) {
    double x = ux(rng);
    double y = uy(rng);
    anchors.push_back({{x, y}, i < spec.n_wifi ? ChannelKind::Wifi : ChannelKind::Ble});
  }
  return anchors;
}

RadioMap synth_radio_map(const SynthSpec& spec) {
  require(spec.n_rp >= 1 && spec.samples_per_rp >= 1 && spec.n_wifi + spec.n_ble >= 1, ErrorKind::Precondition,
          "synthetic spec counts must be >= 1");
  require(spec.shadowing_std_db >= 0.0, ErrorKind::Precondition, "shadowing std must be >= 0");
  require(spec.bounds.width() > 0.0 && spec.bounds.height() > 0.0, ErrorKind::Precondition,
          "synthetic bounds have zero area");

  const auto anchors = synth_anchors(spec);
  const double w = spec.bounds.width();
  const double h = spec.bounds.height();
  const auto nx = static_cast<std::size_t>(
      std::max(1.0, std::round(std::sqrt(static_cast<double>(spec.n_rp) * w / h))));
  const std::size_t ny = (spec.n_rp + nx - 1) / nx;
  const double cw = w / static_cast<double>(nx);
  const double ch = h / static_cast<double>(ny);

  Rng layout_rng(derive_seed(spec.seed, {0xB}));
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  std::vector<Position> rps;
  for (std::size_t i = 0; i < spec.n_rp; ++i) {
    const std::size_t cx = i % nx;
    const std::size_t cy = i / nx;
    double x = spec.bounds.x_min + (static_cast<double>(cx) + 0.5 + jitter(layout_rng)) * cw;
    double y = spec.bounds.y_min + (static_cast<double>(cy) + 0.5 + jitter(layout_rng)) * ch;
    rps.push_back({x, y});
  }

  RadioMap map;
  map.bounds = spec.bounds;
  map.meta.name = "synth-" + std::to_string(spec.seed);
  map.meta.n_wifi = spec.n_wifi;
  map.meta.n_ble = spec.n_ble;
  Rng noise_rng(derive_seed(spec.seed, {0xC}));
  std::normal_distribution<double> shadow(0.0, 1.0);
  for (std::size_t r = 0; r < spec.n_rp; ++r) {
    for (std::size_t s = 0; s < spec.samples_per_rp; ++s) {
      Sample sample;
      sample.rp_id = static_cast<std::int64_t>(r);
      sample.position = rps[r];
      sample.fingerprint.rss.reserve(anchors.size());
      for (const auto& a : anchors) {
        double rss = path_loss_rss(spec.tx_power_dbm, spec.path_loss_exponent, distance(rps[r], a.position));
        if (spec.shadowing_std_db > 0.0) rss += spec.shadowing_std_db * shadow(noise_rng);
        sample.fingerprint.rss.push_back(std::clamp(rss, kMinRssDbm, kMaxRssDbm));
      }
      map.samples.push_back(std::move(sample));
    }
  }
  return map;
}

RadioMap subset(const RadioMap& map, std::span<const std::size_t> indices) {
  RadioMap out;
  out.bounds = map.bounds;
  out.meta = map.meta;
  out.samples.reserve(indices.size());
  for (auto i : indices) out.samples.push_back(map.samples.at(i));
  return out;
}

SplitResult stratified_split(const RadioMap& map, const SplitSpec& spec) {
  require(spec.train > 0.0 && spec.val > 0.0 && spec.test > 0.0, ErrorKind::Precondition,
          "split ratios must all be positive");
  require(std::abs(spec.train + spec.val + spec.test - 1.0) < 1e-9, ErrorKind::Precondition,
          "split ratios must sum to 1");

  std::map<std::int64_t, std::vector<std::size_t>> by_rp;
  for (std::size_t i = 0; i < map.samples.size(); ++i) by_rp[map.samples[i].rp_id].push_back(i);

  Rng rng(spec.seed);
  std::vector<std::size_t> train, val, test;
  for (auto& [rp, idx] : by_rp) {
    const std::size_t n = idx.size();
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test + 1e-9));
    if (n_val < 1 || n_test < 1 || n_val + n_test >= n)
      fail(ErrorKind::Precondition, "RP " + std::to_string(rp) + " has " + std::to_string(n) +
                                        " samples, too few for non-empty train/val/test");
    std::shuffle(idx.begin(), idx.end(), rng);
    val.insert(val.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val),
                idx.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
    train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  std::sort(test.begin(), test.end());
  return {subset(map, train), subset(map, val), subset(map, test)};
}

std::vector<std::pair<std::size_t, std::size_t>> rp_segments(const RadioMap& map) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= map.samples.size(); ++i) {
    if (i == map.samples.size() || map.samples[i].rp_id != map.samples[begin].rp_id) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

}  // namespace fpfuse
