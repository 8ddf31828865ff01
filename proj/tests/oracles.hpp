// Reference implementations used only by tests: slow, direct, independent of
// the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <tuple>
#include <vector>

#include "fpfuse/persistence.hpp"

namespace oracle {

// Two-sided signed-rank p by enumerating all 2^n sign patterns of the
// nonzero differences; counts patterns whose W+ is at least as far from the
// null center as the observed one.
inline double wilcoxon_enumerate(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  const std::size_t n = d.size();
  if (n == 0) return 1.0;
  // Average ranks, doubled to stay integral.
  std::vector<long> r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    long less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++less;
      else if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    r2[i] = 2 * less + equal + 1;
  }
  long total = 0, observed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += r2[i];
    if (d[i] > 0) observed += r2[i];
  }
  const long dev = std::abs(2 * observed - total);
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    long w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += r2[i];
    if (std::abs(2 * w - total) >= dev) ++hits;
  }
  return std::min(1.0, static_cast<double>(hits) / std::ldexp(1.0, static_cast<int>(n)));
}

// Full Vietoris-Rips boundary matrix (vertices, all edges, all triangles)
// reduced with the textbook left-to-right algorithm on dense Z/2 columns.
inline fpfuse::PersistenceDiagram rips_boundary_reduction(const std::vector<fpfuse::Point2>& pts) {
  const std::size_t n = pts.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    const double dx = pts[i].x - pts[j].x;
    const double dy = pts[i].y - pts[j].y;
    return std::sqrt(dx * dx + dy * dy);
  };
  struct Simplex {
    double value;
    int dim;
    std::vector<std::size_t> verts;
  };
  std::vector<Simplex> cx;
  for (std::size_t i = 0; i < n; ++i) cx.push_back({0.0, 0, {i}});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) cx.push_back({dist(i, j), 1, {i, j}});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        cx.push_back({std::max({dist(i, j), dist(i, k), dist(j, k)}), 2, {i, j, k}});
  std::stable_sort(cx.begin(), cx.end(), [](const Simplex& a, const Simplex& b) {
    return std::tie(a.value, a.dim) < std::tie(b.value, b.dim);
  });
  const std::size_t m = cx.size();
  auto index_of = [&](const std::vector<std::size_t>& v) {
    for (std::size_t s = 0; s < m; ++s)
      if (cx[s].verts == v) return s;
    return m;
  };
  std::vector<std::vector<char>> col(m, std::vector<char>(m, 0));
  for (std::size_t s = 0; s < m; ++s) {
    const auto& v = cx[s].verts;
    if (v.size() < 2) continue;
    for (std::size_t drop = 0; drop < v.size(); ++drop) {
      std::vector<std::size_t> face;
      for (std::size_t t = 0; t < v.size(); ++t)
        if (t != drop) face.push_back(v[t]);
      col[s][index_of(face)] = 1;
    }
  }
  auto low = [&](std::size_t s) -> long {
    for (std::size_t r = m; r-- > 0;)
      if (col[s][r]) return static_cast<long>(r);
    return -1;
  };
  std::vector<long> owner(m, -1);
  fpfuse::PersistenceDiagram out;
  for (std::size_t s = 0; s < m; ++s) {
    long l = low(s);
    while (l >= 0 && owner[static_cast<std::size_t>(l)] >= 0) {
      const auto& other = col[static_cast<std::size_t>(owner[static_cast<std::size_t>(l)])];
      for (std::size_t r = 0; r < m; ++r) col[s][r] ^= other[r];
      l = low(s);
    }
    if (l < 0) continue;
    owner[static_cast<std::size_t>(l)] = static_cast<long>(s);
    const auto& born = cx[static_cast<std::size_t>(l)];
    const fpfuse::PersistencePair p{born.value, cx[s].value};
    if (born.dim == 0) out.h0.push_back(p);
    else if (p.death > p.birth) out.h1.push_back(p);
  }
  auto by_value = [](const fpfuse::PersistencePair& a, const fpfuse::PersistencePair& b) {
    return std::tie(a.birth, a.death) < std::tie(b.birth, b.death);
  };
  std::sort(out.h0.begin(), out.h0.end(), by_value);
  std::sort(out.h1.begin(), out.h1.end(), by_value);
  return out;
}

}  // namespace oracle
