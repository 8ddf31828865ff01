#include "fpfuse/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fpfuse/error.hpp"

namespace fpfuse {

GridSpec make_grid(const Bounds& bounds, double h) {
  require(h > 0.0 && std::isfinite(h), ErrorKind::Precondition, "cell width must be positive");
  require(bounds.width() > 0.0 && bounds.height() > 0.0, ErrorKind::Precondition, "grid bounds are degenerate");
  GridSpec g;
  g.bounds = bounds;
  g.h = h;
  g.nx = static_cast<std::size_t>(std::max(1.0, std::ceil(bounds.width() / h - 1e-9)));
  g.ny = static_cast<std::size_t>(std::max(1.0, std::ceil(bounds.height() / h - 1e-9)));
  g.centroids.reserve(g.nx * g.ny);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    const double y0 = bounds.y_min + static_cast<double>(iy) * h;
    const double y1 = std::min(y0 + h, bounds.y_max);
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double x0 = bounds.x_min + static_cast<double>(ix) * h;
      const double x1 = std::min(x0 + h, bounds.x_max);
      g.centroids.push_back({0.5 * (x0 + x1), 0.5 * (y0 + y1)});
    }
  }
  return g;
}

double Bba::total() const {
  double s = theta_mass;
  for (double m : singleton) s += m;
  return s;
}

Bba bba_from_point(Position r_hat, const GridSpec& grid, double alpha, double theta_discount) {
  require(alpha > 0.0, ErrorKind::Precondition, "DST alpha must be positive");
  require(theta_discount >= 0.0 && theta_discount < 1.0, ErrorKind::Precondition,
          "theta discount must be in [0, 1)");
  Bba m;
  m.singleton.resize(grid.size());
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    m.singleton[j] = distance(r_hat, grid.centroids[j]);
    min_d = std::min(min_d, m.singleton[j]);
  }
  // Softmax shifted by the nearest distance for range safety.
  double z = 0.0;
  for (auto& v : m.singleton) {
    v = std::exp(-alpha * (v - min_d));
    z += v;
  }
  const double scale = (1.0 - theta_discount) / z;
  for (auto& v : m.singleton) v *= scale;
  m.theta_mass = theta_discount;
  return m;
}

double conflict_mass(const Bba& m1, const Bba& m2) {
  require(m1.singleton.size() == m2.singleton.size(), ErrorKind::Dimension, "BBAs are on different grids");
  double s1 = 0.0, s2 = 0.0, agree = 0.0;
  for (std::size_t j = 0; j < m1.singleton.size(); ++j) {
    s1 += m1.singleton[j];
    s2 += m2.singleton[j];
    agree += m1.singleton[j] * m2.singleton[j];
  }
  return std::max(0.0, s1 * s2 - agree);
}

Bba dempster_combine(const Bba& m1, const Bba& m2) {
  require(m1.singleton.size() == m2.singleton.size(), ErrorKind::Dimension, "BBAs are on different grids");
  Bba out;
  out.singleton.resize(m1.singleton.size());
  double total = 0.0;
  for (std::size_t j = 0; j < out.singleton.size(); ++j) {
    const double v = m1.singleton[j] * m2.singleton[j] + m1.singleton[j] * m2.theta_mass +
                     m1.theta_mass * m2.singleton[j];
    out.singleton[j] = v;
    total += v;
  }
  out.theta_mass = m1.theta_mass * m2.theta_mass;
  total += out.theta_mass;
  // total = 1 - K for inputs on the simplex.
  if (!(total > 1.0 - kTotalConflict))
    fail(ErrorKind::Conflict, "total conflict between evidence sources (K >= 1 - 1e-12)");
  for (auto& v : out.singleton) v /= total;
  out.theta_mass /= total;
  return out;
}

CellEstimate argmax_belief(const Bba& m, const GridSpec& grid) {
  require(!m.singleton.empty() && m.singleton.size() == grid.size(), ErrorKind::Dimension,
          "BBA does not match the grid");
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.singleton.size(); ++j)
    if (m.singleton[j] > m.singleton[best]) best = j;
  return {best, grid.centroids[best]};
}

Position belief_mean(const Bba& m, const GridSpec& grid) {
  require(m.singleton.size() == grid.size(), ErrorKind::Dimension, "BBA does not match the grid");
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    sw += m.singleton[j];
    sx += m.singleton[j] * grid.centroids[j].x;
    sy += m.singleton[j] * grid.centroids[j].y;
  }
  if (!(sw > 0.0)) return argmax_belief(m, grid).centroid;
  return {sx / sw, sy / sw};
}

double nearest_centroid_distance(Position r_hat, const GridSpec& grid) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : grid.centroids) best = std::min(best, distance(r_hat, c));
  return best;
}

double confidence(Position r_hat, const GridSpec& grid, double beta) {
  require(beta > 0.0, ErrorKind::Precondition, "confidence beta must be positive");
  return std::exp(-beta * nearest_centroid_distance(r_hat, grid));
}

double choquet(double s1, double s2, const ChoquetMeasure& measure) {
  // Source holding the larger score contributes its singleton measure.
  if (s1 <= s2) return s1 + (s2 - s1) * measure.mu2;
  return s2 + (s1 - s2) * measure.mu1;
}

ChoquetMeasure fit_choquet_measure(std::span<const double> s1, std::span<const double> s2,
                                   std::span<const double> targets) {
  const std::size_t n = targets.size();
  require(n >= 2, ErrorKind::Precondition, "Choquet fit needs at least two validation samples");
  require(s1.size() == n && s2.size() == n, ErrorKind::Dimension, "score and target lengths differ");

  // C = min + gap * mu_top, so each coordinate is an independent 1-D least
  // squares problem over the samples where that source is on top.
  double num1 = 0.0, den1 = 0.0, num2 = 0.0, den2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::min(s1[i], s2[i]);
    const double gap = std::abs(s1[i] - s2[i]);
    if (gap == 0.0) continue;
    if (s1[i] > s2[i]) {
      num1 += gap * (targets[i] - lo);
      den1 += gap * gap;
    } else {
      num2 += gap * (targets[i] - lo);
      den2 += gap * gap;
    }
  }
  ChoquetMeasure m;
  if (den1 == 0.0 && den2 == 0.0) {
    m.identifiable = false;
    return m;
  }
  // Projected coordinate descent; the objective separates, so one sweep per
  // coordinate already lands on the constrained optimum. The loop runs until
  // the update falls below 1e-9.
  double mu1 = 0.5, mu2 = 0.5;
  for (int iter = 0; iter < 100; ++iter) {
    const double new1 = den1 > 0.0 ? std::clamp(num1 / den1, 0.0, 1.0) : mu1;
    const double new2 = den2 > 0.0 ? std::clamp(num2 / den2, 0.0, 1.0) : mu2;
    const double step = std::abs(new1 - mu1) + std::abs(new2 - mu2);
    mu1 = new1;
    mu2 = new2;
    if (step < 1e-9) break;
  }
  m.mu1 = mu1;
  m.mu2 = mu2;
  m.identifiable = den1 > 0.0 && den2 > 0.0;
  return m;
}

Position convex_combo(Position r1, Position r2, double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, ErrorKind::Precondition, "lambda must be in [0, 1]");
  return {lambda * r1.x + (1.0 - lambda) * r2.x, lambda * r1.y + (1.0 - lambda) * r2.y};
}

double choquet_blend_weight(double s1, double s2, const ChoquetMeasure& measure) {
  const double a = s1 * measure.mu1;
  const double b = s2 * measure.mu2;
  if (!(a + b > 0.0)) return 0.5;
  return std::clamp(a / (a + b), 0.0, 1.0);
}

void write_belief_csv(const Bba& m, const GridSpec& grid, const std::filesystem::path& path) {
  require(m.singleton.size() == grid.size(), ErrorKind::Dimension, "BBA does not match the grid");
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.precision(17);
  out << "cell_index,cx,cy,mass\n";
  for (std::size_t j = 0; j < grid.size(); ++j)
    out << j << ',' << grid.centroids[j].x << ',' << grid.centroids[j].y << ',' << m.singleton[j] << '\n';
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

void write_belief_pgm(const Bba& m, const GridSpec& grid, const std::filesystem::path& path) {
  require(m.singleton.size() == grid.size(), ErrorKind::Dimension, "BBA does not match the grid");
  const double peak = *std::max_element(m.singleton.begin(), m.singleton.end());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
  for (double v : m.singleton) {
    const double level = peak > 0.0 ? std::floor(255.0 * v / peak) : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0.0, 255.0))));
  }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace fpfuse
