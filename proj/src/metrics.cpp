#include "offroad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "offroad/kernels.hpp"
#include "offroad/smooth.hpp"

namespace offroad {

double csd(const PixelPath& path, double meters_per_pixel) {
  const auto k = curvature_profile(path);
  double mean = 0.0;
  for (double v : k) mean += v;
  mean /= static_cast<double>(k.size());
  double var = 0.0;
  for (double v : k) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(k.size())) / meters_per_pixel;
}

double max_abs_curvature(const PixelPath& path, double meters_per_pixel) {
  double m = 0.0;
  for (double v : curvature_profile(path)) m = std::max(m, std::abs(v));
  return m / meters_per_pixel;
}

double min_obstacle_distance(const PixelPath& path, const IntermediateMap& map, double meters_per_pixel) {
  const double inf = std::numeric_limits<double>::infinity();
  if (path.empty()) throw PlanningError(ErrorKind::InvalidArgument, "empty path");
  Cell lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
  Cell hi{std::numeric_limits<int>::min(), std::numeric_limits<int>::min()};
  for (const Vec2& p : path) {
    const Cell c = cell_of(p);
    lo = {std::min(lo.x, c.x), std::min(lo.y, c.y)};
    hi = {std::max(hi.x, c.x), std::max(hi.y, c.y)};
  }
  // Grow the window until the nearest obstacle found is provably the nearest overall.
  for (int margin = 32;; margin *= 2) {
    const int x0 = std::max(0, lo.x - margin), y0 = std::max(0, lo.y - margin);
    const int x1 = std::min(map.width() - 1, hi.x + margin), y1 = std::min(map.height() - 1, hi.y + margin);
    const bool whole = x0 == 0 && y0 == 0 && x1 == map.width() - 1 && y1 == map.height() - 1;
    const int w = x1 - x0 + 1, h = y1 - y0 + 1;
    std::vector<uint8_t> site(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) site[static_cast<size_t>(y) * w + x] = !traversable(map.at(x0 + x, y0 + y));
    const auto edt = kernels::par::edt(w, h, site);
    double best = inf;
    for (const Vec2& p : path) {
      const Cell c = cell_of(p);
      if (c.x < x0 || c.y < y0 || c.x > x1 || c.y > y1) {
        best = 0.0;  // off the map counts as touching an obstacle
        continue;
      }
      best = std::min(best, edt.dist[static_cast<size_t>(c.y - y0) * w + (c.x - x0)]);
    }
    if (best <= margin || whole) return best * meters_per_pixel;
  }
}

}  // namespace offroad
