#include "offroad/grid_search.hpp"

#include <cstdlib>
#include <optional>
#include <queue>

namespace offroad {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Zero-initialised array whose pages are only committed when touched, so
// searches over huge maps pay for the region they explore.
template <typename T>
class LazyArray {
 public:
  explicit LazyArray(size_t n) : data_(static_cast<T*>(std::calloc(n ? n : 1, sizeof(T)))) {
    if (!data_) throw std::bad_alloc();
  }
  ~LazyArray() { std::free(data_); }
  LazyArray(const LazyArray&) = delete;
  LazyArray& operator=(const LazyArray&) = delete;
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

 private:
  T* data_;
};

struct OpenEntry {
  double f;
  double g;
  uint32_t idx;
};

struct OpenOrder {
  // priority_queue pops the "largest"; invert so the best entry is on top.
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.idx > b.idx;
  }
};

enum : uint8_t { kNew = 0, kOpen = 1, kClosed = 2 };

struct SearchState {
  explicit SearchState(size_t n) : g(n), parent(n), state(n) {}
  LazyArray<double> g;
  LazyArray<uint32_t> parent;  // index + 1, 0 for none
  LazyArray<uint8_t> state;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
};

void check_endpoints(const ClearanceMap& grid, Cell s, Cell t, const char* stage) {
  if (!grid.passable(s))
    throw PlanningError(ErrorKind::NoGridPath, "start cell is not traversable", stage);
  if (!grid.passable(t))
    throw PlanningError(ErrorKind::NoGridPath, "target cell is not traversable", stage);
  if (static_cast<size_t>(grid.width()) * grid.height() >= (size_t{1} << 32) - 1)
    throw PlanningError(ErrorKind::InvalidArgument, "map too large for grid search", stage);
}

double step_cost(Cell a, Cell b) { return octile(a, b); }

GridPath trace(const SearchState& st, const ClearanceMap& grid, uint32_t goal, double cost, size_t expanded) {
  const int w = grid.width();
  std::vector<Cell> rev;
  for (uint32_t i = goal;;) {
    rev.push_back({int(i % w), int(i / w)});
    const uint32_t p = st.parent[i];
    if (p == 0) break;
    i = p - 1;
  }
  GridPath out;
  out.cost = cost;
  out.expanded = expanded;
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
    out.waypoints.push_back(it->center());
    if (out.points.empty()) {
      out.points.push_back(it->center());
      continue;
    }
    // Fill straight or diagonal runs between consecutive waypoints.
    Cell c = cell_of(out.points.back());
    const int sx = (it->x > c.x) - (it->x < c.x);
    const int sy = (it->y > c.y) - (it->y < c.y);
    while (!(c == *it)) {
      c.x += sx;
      c.y += sy;
      out.points.push_back(c.center());
    }
  }
  out.waypoints = compress_collinear(out.waypoints);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ClearanceMap::ClearanceMap(IntermediateMap map, double radius) : map_(std::move(map)), radius_(radius) {
  if (radius_ < 0) throw PlanningError(ErrorKind::InvalidArgument, "negative clearance radius");
  // A cell is blocked when its center lies closer than the radius to the
  // square of a non-traversable cell.
  const int r = static_cast<int>(std::ceil(radius_ + 0.5));
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double ex = std::max(std::abs(dx) - 0.5, 0.0), ey = std::max(std::abs(dy) - 0.5, 0.0);
      if ((dx || dy) && ex * ex + ey * ey < radius_ * radius_) offsets_.push_back({dx, dy});
    }
  tiles_x_ = (map_.width() + kTile - 1) / kTile;
  const int tiles_y = (map_.height() + kTile - 1) / kTile;
  if (!offsets_.empty()) tiles_.resize(static_cast<size_t>(tiles_x_) * tiles_y);
}

const std::vector<uint8_t>& ClearanceMap::tile(int tx, int ty) const {
  auto& slot = tiles_[static_cast<size_t>(ty) * tiles_x_ + tx];
  if (slot) return *slot;
  slot = std::make_unique<std::vector<uint8_t>>(kTile * kTile, 0);
  auto& t = *slot;
  const int x0 = tx * kTile, y0 = ty * kTile;
  for (int y = y0; y < std::min(y0 + kTile, map_.height()); ++y)
    for (int x = x0; x < std::min(x0 + kTile, map_.width()); ++x) {
      if (map_.at(x, y) != CellClass::Free) continue;
      for (const Cell& o : offsets_) {
        const int nx = x + o.x, ny = y + o.y;
        if (map_.in_bounds(nx, ny) && !traversable(map_.at(nx, ny))) {
          t[(y - y0) * kTile + (x - x0)] = 1;
          break;
        }
      }
    }
  return t;
}

bool ClearanceMap::blocked(int x, int y) const {
  const auto& t = tile(x / kTile, y / kTile);
  return t[(y % kTile) * kTile + (x % kTile)] != 0;
}

double octile(Cell a, Cell b) {
  const int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
  return (kSqrt2 - 1.0) * std::min(dx, dy) + std::max(dx, dy);
}

// ---------------------------------------------------------------------------

GridPath astar(const ClearanceMap& grid, Cell s, Cell t, const Deadline& deadline) {
  check_endpoints(grid, s, t, "grid_search");
  deadline.check("grid_search");
  const int w = grid.width();
  SearchState st(static_cast<size_t>(w) * grid.height());
  const auto idx = [w](int x, int y) { return static_cast<uint32_t>(y * size_t(w) + x); };
  const uint32_t si = idx(s.x, s.y), ti = idx(t.x, t.y);
  st.g[si] = 0.0;
  st.state[si] = kOpen;
  st.open.push({octile(s, t), 0.0, si});
  size_t expanded = 0;
  while (!st.open.empty()) {
    const OpenEntry e = st.open.top();
    st.open.pop();
    if (st.state[e.idx] == kClosed || e.g > st.g[e.idx]) continue;
    st.state[e.idx] = kClosed;
    if (e.idx == ti) return trace(st, grid, ti, e.g, expanded);
    if ((++expanded & 4095) == 0) deadline.check("grid_search");
    const Cell c{int(e.idx % w), int(e.idx / w)};
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const int nx = c.x + dx, ny = c.y + dy;
        if (!grid.passable(nx, ny)) continue;
        if (dx && dy && (!grid.passable(c.x + dx, c.y) || !grid.passable(c.x, c.y + dy))) continue;
        const uint32_t ni = idx(nx, ny);
        if (st.state[ni] == kClosed) continue;
        const double ng = e.g + (dx && dy ? kSqrt2 : 1.0);
        if (st.state[ni] == kNew || ng < st.g[ni]) {
          st.g[ni] = ng;
          st.parent[ni] = e.idx + 1;
          st.state[ni] = kOpen;
          st.open.push({ng + octile({nx, ny}, t), ng, ni});
        }
      }
  }
  throw PlanningError(ErrorKind::NoGridPath, "target unreachable", "grid_search");
}

// ---------------------------------------------------------------------------

namespace {

class JumpSearch {
 public:
  JumpSearch(const ClearanceMap& grid, Cell goal) : grid_(grid), goal_(goal) {}

  bool free(int x, int y) const { return grid_.passable(x, y); }

  // Walks from (x, y), entered by the move (dx, dy), until a jump point.
  std::optional<Cell> jump(int x, int y, int dx, int dy) const {
    for (;;) {
      if (!free(x, y)) return std::nullopt;
      if (x == goal_.x && y == goal_.y) return Cell{x, y};
      if (dx && dy) {
        if (jump(x + dx, y, dx, 0) || jump(x, y + dy, 0, dy)) return Cell{x, y};
        if (!free(x + dx, y) || !free(x, y + dy)) return std::nullopt;
      } else if (dx) {
        if ((free(x, y - 1) && !free(x - dx, y - 1)) || (free(x, y + 1) && !free(x - dx, y + 1)))
          return Cell{x, y};
      } else {
        if ((free(x - 1, y) && !free(x - 1, y - dy)) || (free(x + 1, y) && !free(x + 1, y - dy)))
          return Cell{x, y};
      }
      x += dx;
      y += dy;
    }
  }

  // Pruned successor directions of `c` reached from `p` (or all, at the start).
  void directions(Cell c, std::optional<Cell> p, std::vector<Cell>& out) const {
    out.clear();
    const int x = c.x, y = c.y;
    if (!p) {
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy) continue;
          if (!free(x + dx, y + dy)) continue;
          if (dx && dy && (!free(x + dx, y) || !free(x, y + dy))) continue;
          out.push_back({dx, dy});
        }
      return;
    }
    const int dx = (x > p->x) - (x < p->x);
    const int dy = (y > p->y) - (y < p->y);
    if (dx && dy) {
      const bool fy = free(x, y + dy), fx = free(x + dx, y);
      if (fy) out.push_back({0, dy});
      if (fx) out.push_back({dx, 0});
      if (fx && fy && free(x + dx, y + dy)) out.push_back({dx, dy});
    } else if (dx) {
      const bool next = free(x + dx, y), up = free(x, y + 1), down = free(x, y - 1);
      if (next) {
        out.push_back({dx, 0});
        if (up && free(x + dx, y + 1)) out.push_back({dx, 1});
        if (down && free(x + dx, y - 1)) out.push_back({dx, -1});
      }
      if (up) out.push_back({0, 1});
      if (down) out.push_back({0, -1});
    } else {
      const bool next = free(x, y + dy), right = free(x + 1, y), left = free(x - 1, y);
      if (next) {
        out.push_back({0, dy});
        if (right && free(x + 1, y + dy)) out.push_back({1, dy});
        if (left && free(x - 1, y + dy)) out.push_back({-1, dy});
      }
      if (right) out.push_back({1, 0});
      if (left) out.push_back({-1, 0});
    }
  }

 private:
  const ClearanceMap& grid_;
  Cell goal_;
};

}  // namespace

GridPath jps(const ClearanceMap& grid, Cell s, Cell t, const Deadline& deadline) {
  check_endpoints(grid, s, t, "grid_search");
  deadline.check("grid_search");
  const int w = grid.width();
  SearchState st(static_cast<size_t>(w) * grid.height());
  const auto idx = [w](int x, int y) { return static_cast<uint32_t>(y * size_t(w) + x); };
  const uint32_t si = idx(s.x, s.y), ti = idx(t.x, t.y);
  JumpSearch js(grid, t);
  st.g[si] = 0.0;
  st.state[si] = kOpen;
  st.open.push({octile(s, t), 0.0, si});
  std::vector<Cell> dirs;
  size_t expanded = 0;
  while (!st.open.empty()) {
    const OpenEntry e = st.open.top();
    st.open.pop();
    if (st.state[e.idx] == kClosed || e.g > st.g[e.idx]) continue;
    st.state[e.idx] = kClosed;
    if (e.idx == ti) return trace(st, grid, ti, e.g, expanded);
    if ((++expanded & 1023) == 0) deadline.check("grid_search");
    const Cell c{int(e.idx % w), int(e.idx / w)};
    std::optional<Cell> parent;
    if (st.parent[e.idx]) {
      const uint32_t p = st.parent[e.idx] - 1;
      parent = Cell{int(p % w), int(p / w)};
    }
    js.directions(c, parent, dirs);
    for (const Cell& d : dirs) {
      const auto jp = js.jump(c.x + d.x, c.y + d.y, d.x, d.y);
      if (!jp) continue;
      const uint32_t ni = idx(jp->x, jp->y);
      if (st.state[ni] == kClosed) continue;
      const double ng = e.g + step_cost(c, *jp);
      if (st.state[ni] == kNew || ng < st.g[ni]) {
        st.g[ni] = ng;
        st.parent[ni] = e.idx + 1;
        st.state[ni] = kOpen;
        st.open.push({ng + octile(*jp, t), ng, ni});
      }
    }
  }
  throw PlanningError(ErrorKind::NoGridPath, "target unreachable", "grid_search");
}

GridPath grid_search(GridPlanner planner, const ClearanceMap& grid, Cell s, Cell t, const Deadline& deadline) {
  return planner == GridPlanner::AStar ? astar(grid, s, t, deadline) : jps(grid, s, t, deadline);
}

PixelPath compress_collinear(const PixelPath& path) {
  if (path.size() <= 2) return path;
  PixelPath out{path.front()};
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    const Vec2 a = path[i] - out.back(), b = path[i + 1] - path[i];
    if (std::abs(a.cross(b)) > 1e-9 || a.dot(b) < 0) out.push_back(path[i]);
  }
  out.push_back(path.back());
  return out;
}

}  // namespace offroad
