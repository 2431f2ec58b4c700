#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "offroad/errors.hpp"
#include "offroad/geomap.hpp"

namespace offroad {

/// Traversability view of a map with obstacles grown by a clearance radius.
///
/// A Free cell is blocked when its center is closer than `radius` to any
/// non-traversable cell, taken as a unit square. Only Free cells are ever
/// blocked; Trail and PassableOverride cells keep their class. Inflation is
/// computed per 64x64 tile on first access, so a query touching a small part
/// of a large map stays cheap.
/// Not thread-safe: use one view per planning request.
class ClearanceMap {
 public:
  explicit ClearanceMap(IntermediateMap map, double radius = 0.0);

  int width() const { return map_.width(); }
  int height() const { return map_.height(); }
  double radius() const { return radius_; }
  const IntermediateMap& map() const { return map_; }

  bool passable(int x, int y) const {
    if (!map_.in_bounds(x, y)) return false;
    const CellClass c = map_.at(x, y);
    if (!traversable(c)) return false;
    if (c != CellClass::Free || offsets_.empty()) return true;
    return !blocked(x, y);
  }
  bool passable(Cell c) const { return passable(c.x, c.y); }

 private:
  static constexpr int kTile = 64;
  bool blocked(int x, int y) const;
  const std::vector<uint8_t>& tile(int tx, int ty) const;

  IntermediateMap map_;
  double radius_ = 0.0;
  std::vector<Cell> offsets_;
  int tiles_x_ = 0;
  mutable std::vector<std::unique_ptr<std::vector<uint8_t>>> tiles_;
};

struct GridPath {
  PixelPath points;     // every cell along the path, 8-connected
  PixelPath waypoints;  // turning points (jump points for JPS)
  double cost = 0.0;    // pixels
  size_t expanded = 0;
};

/// Optimal 8-connected search with the octile heuristic. Diagonal moves need
/// both adjacent axial cells passable. Ties: lower f, then higher g, then
/// lower row-major index.
GridPath astar(const ClearanceMap& grid, Cell s, Cell t, const Deadline& deadline = {});

/// Jump point search with the same move rules and tie-breaking as astar().
GridPath jps(const ClearanceMap& grid, Cell s, Cell t, const Deadline& deadline = {});

enum class GridPlanner { AStar, Jps };
GridPath grid_search(GridPlanner planner, const ClearanceMap& grid, Cell s, Cell t,
                     const Deadline& deadline = {});

/// Octile distance between two cells.
double octile(Cell a, Cell b);

/// Keeps only the vertices where the direction changes.
PixelPath compress_collinear(const PixelPath& path);

/// True when every cell the segment a-b passes through satisfies `ok`.
template <typename Pred>
bool line_of_sight(Vec2 a, Vec2 b, Pred&& ok);

/// Greedy shortcutting: from each kept vertex, jump ahead to a later vertex
/// that is still in sight.
template <typename Pred>
PixelPath simplify_line_of_sight(const PixelPath& path, Pred&& ok);

// ---------------------------------------------------------------------------

template <typename Pred>
bool line_of_sight(Vec2 a, Vec2 b, Pred&& ok) {
  // Supercover walk: visits every cell whose square the segment crosses,
  // including both cells when it passes exactly through a corner.
  Cell c = cell_of(a);
  const Cell end = cell_of(b);
  if (!ok(c.x, c.y)) return false;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double tdx = sx ? 1.0 / std::abs(dx) : inf;
  const double tdy = sy ? 1.0 / std::abs(dy) : inf;
  double tx = sx ? ((c.x + 0.5 * sx) - a.x) / dx : inf;
  double ty = sy ? ((c.y + 0.5 * sy) - a.y) / dy : inf;
  int guard = 4 * (std::abs(end.x - c.x) + std::abs(end.y - c.y)) + 8;
  while (!(c == end) && guard-- > 0) {
    if (std::abs(tx - ty) < 1e-12) {
      if (!ok(c.x + sx, c.y) || !ok(c.x, c.y + sy)) return false;
      c.x += sx;
      c.y += sy;
      tx += tdx;
      ty += tdy;
    } else if (tx < ty) {
      c.x += sx;
      tx += tdx;
    } else {
      c.y += sy;
      ty += tdy;
    }
    if (!ok(c.x, c.y)) return false;
  }
  return true;
}

template <typename Pred>
PixelPath simplify_line_of_sight(const PixelPath& path, Pred&& ok) {
  if (path.size() <= 2) return path;
  PixelPath out{path.front()};
  size_t i = 0;
  while (i + 1 < path.size()) {
    // Exponential probe, then bisect. Visibility is not monotone along the
    // path, so this finds a far visible vertex rather than the farthest one.
    size_t best = i + 1;
    size_t step = 1;
    while (i + step * 2 < path.size() && line_of_sight(path[i], path[i + step * 2], ok)) step *= 2;
    size_t lo = i + step, hi = std::min(path.size() - 1, i + step * 2);
    if (line_of_sight(path[i], path[lo], ok)) best = lo;
    while (lo < hi) {
      const size_t mid = (lo + hi + 1) / 2;
      if (line_of_sight(path[i], path[mid], ok)) {
        lo = mid;
        best = mid;
      } else {
        hi = mid - 1;
      }
    }
    best = std::max(best, i + 1);
    out.push_back(path[best]);
    i = best;
  }
  return out;
}

}  // namespace offroad
