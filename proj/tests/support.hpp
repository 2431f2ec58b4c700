#pragma once

// Independent reference implementations used as test oracles. They are kept
// deliberately naive: brute force over all cells, no shared code with src/.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>
#include <limits>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "offroad/geomap.hpp"

namespace oracle {

using offroad::CellClass;
using offroad::IntermediateMap;
using offroad::Vec2;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Map from rows of characters: '.' free, '#' obstacle, 'T' trail, '~' water.
inline IntermediateMap from_ascii(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size()), w = static_cast<int>(rows.front().size());
  IntermediateMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      CellClass c = CellClass::Free;
      switch (rows[y][x]) {
        case '#': c = CellClass::Obstacle; break;
        case 'T': c = CellClass::Trail; break;
        case '~': c = CellClass::Water; break;
        default: break;
      }
      m.set(x, y, c);
    }
  return m;
}

/// Distance from every cell center to the nearest site center, by exhaustive search.
inline std::vector<double> brute_edt(int w, int h, const std::vector<uint8_t>& site) {
  std::vector<double> out(static_cast<size_t>(w) * h, kInf);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
          if (site[static_cast<size_t>(v) * w + u])
            out[static_cast<size_t>(y) * w + x] =
                std::min(out[static_cast<size_t>(y) * w + x], std::hypot(double(x - u), double(y - v)));
  return out;
}

/// Even-odd ray casting (crossing number) point-in-polygon.
inline bool ray_cast_inside(Vec2 p, const std::vector<Vec2>& poly) {
  bool in = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xc) in = !in;
    }
  }
  return in;
}

/// Winding number by summing signed angles subtended by each edge.
inline int angle_winding(Vec2 p, const std::vector<Vec2>& poly) {
  double total = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i] - p, b = poly[(i + 1) % poly.size()] - p;
    total += std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

/// Distance from point p to the unit square centered on cell (cx, cy).
inline double distance_to_cell_square(Vec2 p, int cx, int cy) {
  const double qx = std::clamp(p.x, cx - 0.5, cx + 0.5), qy = std::clamp(p.y, cy - 0.5, cy + 0.5);
  return std::hypot(p.x - qx, p.y - qy);
}

/// Dijkstra over 8-connected cells accepted by `ok`, diagonal moves needing
/// both axial neighbours (when `no_corner_cut`). Returns the distance array.
template <typename Ok>
std::vector<double> dijkstra(int w, int h, int sx, int sy, Ok ok, bool no_corner_cut = true) {
  std::vector<double> d(static_cast<size_t>(w) * h, kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[static_cast<size_t>(sy) * w + sx] = 0.0;
  pq.push({0.0, sy * w + sx});
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > d[u]) continue;
    const int ux = u % w, uy = u / w;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const int vx = ux + dx, vy = uy + dy;
        if (vx < 0 || vy < 0 || vx >= w || vy >= h || !ok(vx, vy)) continue;
        if (dx && dy && no_corner_cut && (!ok(ux + dx, uy) || !ok(ux, uy + dy))) continue;
        const double nd = du + ((dx && dy) ? std::sqrt(2.0) : 1.0);
        if (nd < d[vy * w + vx]) {
          d[vy * w + vx] = nd;
          pq.push({nd, vy * w + vx});
        }
      }
  }
  return d;
}

/// All-pairs shortest paths (Floyd-Warshall) over an explicit weighted graph.
inline std::vector<std::vector<double>> floyd_warshall(size_t n,
                                                       const std::vector<std::tuple<size_t, size_t, double>>& edges) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (auto [a, b, w] : edges) {
    d[a][b] = std::min(d[a][b], w);
    d[b][a] = std::min(d[b][a], w);
  }
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

/// Scalar obstacle field value. Without any edge cell the edge factor is 1.
inline double field_value(double d_o, double d_v, double alpha, double d_o_max) {
  if (d_o >= d_o_max) return 0.0;
  if (d_o == 0.0) return 1.0;
  const double a = alpha / (alpha + d_o);
  const double b = std::isinf(d_v) ? 1.0 : d_v / (d_o + d_v);
  const double c = (d_o - d_o_max) * (d_o - d_o_max) / (d_o_max * d_o_max);
  return a * b * c;
}

/// Menger curvature 4*area/(|pq||qr||rp|), computed from side lengths (Heron).
inline double circumcurvature(Vec2 p, Vec2 q, Vec2 r) {
  const double a = std::hypot(q.x - p.x, q.y - p.y), b = std::hypot(r.x - q.x, r.y - q.y),
               c = std::hypot(p.x - r.x, p.y - r.y);
  const double s = 0.5 * (a + b + c);
  const double area2 = std::max(0.0, s * (s - a) * (s - b) * (s - c));
  if (a * b * c == 0.0) return 0.0;
  return 4.0 * std::sqrt(area2) / (a * b * c);
}

inline double max_circumcurvature(const std::vector<Vec2>& p) {
  double m = 0.0;
  for (size_t i = 1; i + 1 < p.size(); ++i) m = std::max(m, circumcurvature(p[i - 1], p[i], p[i + 1]));
  return m;
}

}  // namespace oracle
