#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "fpfuse/types.hpp"

namespace fpfuse {

// Square-cell tiling of the floor, row-major (x fastest). Edge cells are
// clipped to the bounds and their centroids sit at the clipped centers.
struct GridSpec {
  Bounds bounds;
  double h = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<Position> centroids;

  std::size_t size() const { return centroids.size(); }
};

GridSpec make_grid(const Bounds& bounds, double h);

// Masses over singleton cells plus the whole frame.
struct Bba {
  std::vector<double> singleton;
  double theta_mass = 0.0;

  double total() const;
};

// Softmax of -alpha * Euclidean distance to each centroid, scaled by
// (1 - theta_discount); the discount goes to the whole frame.
Bba bba_from_point(Position r_hat, const GridSpec& grid, double alpha, double theta_discount);

inline constexpr double kTotalConflict = 1.0 - 1e-12;

// Dempster's rule for singleton + frame BBAs. Throws Error(Conflict) when the
// conflict mass reaches kTotalConflict.
Bba dempster_combine(const Bba& m1, const Bba& m2);

double conflict_mass(const Bba& m1, const Bba& m2);

struct CellEstimate {
  std::size_t cell = 0;
  Position centroid;
};

CellEstimate argmax_belief(const Bba& m, const GridSpec& grid);

// Mass-weighted mean of centroids over the singleton masses.
Position belief_mean(const Bba& m, const GridSpec& grid);

double nearest_centroid_distance(Position r_hat, const GridSpec& grid);

// exp(-beta * min_j dist(r_hat, c_j)).
double confidence(Position r_hat, const GridSpec& grid, double beta);

struct ChoquetMeasure {
  double mu1 = 0.5;  // RF
  double mu2 = 0.5;  // wKNN
  bool identifiable = true;
};

double choquet(double s1, double s2, const ChoquetMeasure& measure);

// Box-constrained least squares over [0,1]^2 by projected coordinate descent.
ChoquetMeasure fit_choquet_measure(std::span<const double> s1, std::span<const double> s2,
                                   std::span<const double> targets);

Position convex_combo(Position r1, Position r2, double lambda);

// lambda* = s1 mu1 / (s1 mu1 + s2 mu2), clamped to [0, 1]; 0.5 when both
// weights vanish.
double choquet_blend_weight(double s1, double s2, const ChoquetMeasure& measure);

// Belief-map export: CSV `cell_index,cx,cy,mass` and binary 8-bit PGM with
// mass scaled by floor(255 * m / max m).
void write_belief_csv(const Bba& m, const GridSpec& grid, const std::filesystem::path& path);
void write_belief_pgm(const Bba& m, const GridSpec& grid, const std::filesystem::path& path);

}  // namespace fpfuse
