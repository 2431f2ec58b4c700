#include "offroad/trails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_set>

namespace offroad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

uint64_t cell_key(Cell c) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(c.y)) << 32) | static_cast<uint32_t>(c.x);
}

// Separating-axis overlap test between an axis-aligned box and a convex quad.
bool box_overlaps_quad(Vec2 lo, Vec2 hi, std::span<const Vec2, 4> quad) {
  const Vec2 box[4] = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
  auto separated = [&](Vec2 axis) {
    double a0 = kInf, a1 = -kInf, b0 = kInf, b1 = -kInf;
    for (const Vec2& p : box) {
      a0 = std::min(a0, p.dot(axis));
      a1 = std::max(a1, p.dot(axis));
    }
    for (const Vec2& p : quad) {
      b0 = std::min(b0, p.dot(axis));
      b1 = std::max(b1, p.dot(axis));
    }
    return a1 < b0 || b1 < a0;
  };
  if (separated({1, 0}) || separated({0, 1})) return false;
  for (int i = 0; i < 4; ++i) {
    const Vec2 e = quad[(i + 1) % 4] - quad[i];
    if (separated({-e.y, e.x})) return false;
  }
  return true;
}

bool point_in_quad(Vec2 p, std::span<const Vec2, 4> quad) {
  // Convex quad: same side of every edge (either orientation).
  int pos = 0, neg = 0;
  for (int i = 0; i < 4; ++i) {
    const double c = (quad[(i + 1) % 4] - quad[i]).cross(p - quad[i]);
    if (c > 1e-12) ++pos;
    else if (c < -1e-12) ++neg;
    else return false;  // on the boundary: not strictly inside
  }
  return pos == 4 || neg == 4;
}

std::pair<Vec2, Vec2> quad_bounds(std::span<const Vec2, 4> quad) {
  Vec2 lo{kInf, kInf}, hi{-kInf, -kInf};
  for (const Vec2& p : quad) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return {lo, hi};
}

}  // namespace

// ---------------------------------------------------------------------------

TrailNetwork TrailNetwork::build(const IntermediateMap& map, double df) {
  TrailNetwork net;
  net.df_ = df;
  const auto cells = map.cells();
  for (size_t i = 0; i < cells.size(); ++i)
    if (cells[i] == CellClass::Trail) net.points_.push_back(map.cell_at(i));
  net.lookup_.reserve(net.points_.size());
  for (size_t i = 0; i < net.points_.size(); ++i) net.lookup_.emplace(cell_key(net.points_[i]), i);
  net.rtree_ = PointIndex(net.points_);

  std::vector<Vec2> full;
  full.reserve(net.points_.size());
  for (const Cell& c : net.points_) full.push_back(c.center());
  net.kdtree_full_ = KdTree2(std::move(full));

  std::unordered_set<uint64_t> seen;
  std::vector<Vec2> down;
  for (const Cell& c : net.points_) {
    const Cell d{static_cast<int>(std::floor(c.x / df)), static_cast<int>(std::floor(c.y / df))};
    if (seen.insert(cell_key(d)).second) down.push_back(d.center());
  }
  net.kdtree_down_ = KdTree2(std::move(down));
  if (map.width() >= df && map.height() >= df) net.down_map_ = downsample(map, df);
  return net;
}

std::vector<size_t> TrailNetwork::neighbors(size_t i) const {
  std::vector<size_t> out;
  const Cell c = points_[i];
  for (int k = 0; k < 8; ++k) {
    const long j = find({c.x + kDx[k], c.y + kDy[k]});
    if (j >= 0) out.push_back(static_cast<size_t>(j));
  }
  return out;
}

long TrailNetwork::find(Cell c) const {
  const auto it = lookup_.find(cell_key(c));
  return it == lookup_.end() ? -1 : static_cast<long>(it->second);
}

Cell TrailNetwork::nearest_full(Vec2 p) const { return points_[kdtree_full_.nearest(p)]; }

Cell TrailNetwork::to_down(Vec2 full) const {
  const Vec2 q{(full.x + 0.5) / df_ - 0.5, (full.y + 0.5) / df_ - 0.5};
  return cell_of(kdtree_down_.point(kdtree_down_.nearest(q)));
}

Cell TrailNetwork::to_full(Cell down) const {
  const Vec2 center{(down.x + 0.5) * df_ - 0.5, (down.y + 0.5) * df_ - 0.5};
  return nearest_full(center);
}

// ---------------------------------------------------------------------------

void GoalPoseQuery::validate() const {
  if (!(poly_md > 0 && poly_md <= poly_md_max && poly_sd > 0 && poly_sd <= poly_sd_max))
    throw PlanningError(ErrorKind::InvalidArgument, "polygon sizes must satisfy 0 < size <= max");
  if (!(md_i > 0 && sd_i > 0))
    throw PlanningError(ErrorKind::InvalidArgument, "polygon increments must be positive");
  if (!(dbscan_eps > 0) || dbscan_min_pts < 1)
    throw PlanningError(ErrorKind::InvalidArgument, "invalid DBSCAN parameters");
}

std::array<Vec2, 4> query_polygon(Vec2 center, double heading, double half_main, double half_side) {
  const Vec2 u{std::cos(heading), std::sin(heading)};
  const Vec2 v{-u.y, u.x};
  return {center + u * half_main + v * half_side, center - u * half_main + v * half_side,
          center - u * half_main - v * half_side, center + u * half_main - v * half_side};
}

std::vector<uint32_t> points_covered_by(const TrailNetwork& net, std::span<const Vec2, 4> rect) {
  const auto [lo, hi] = quad_bounds(rect);
  std::vector<uint32_t> out;
  for (uint32_t i : net.rtree().query_box(lo, hi)) {
    const Vec2 c = net.points()[i].center();
    const bool inside = point_in_quad(c + Vec2{-0.5, -0.5}, rect) && point_in_quad(c + Vec2{0.5, -0.5}, rect) &&
                        point_in_quad(c + Vec2{0.5, 0.5}, rect) && point_in_quad(c + Vec2{-0.5, 0.5}, rect);
    if (inside) out.push_back(i);
  }
  return out;
}

std::vector<uint32_t> points_intersecting(const TrailNetwork& net, std::span<const Vec2, 4> rect) {
  auto [lo, hi] = quad_bounds(rect);
  lo -= Vec2{0.5, 0.5};
  hi += Vec2{0.5, 0.5};
  std::vector<uint32_t> out;
  for (uint32_t i : net.rtree().query_box(lo, hi)) {
    const Vec2 c = net.points()[i].center();
    if (box_overlaps_quad(c - Vec2{0.5, 0.5}, c + Vec2{0.5, 0.5}, rect)) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<size_t>> dbscan(std::span<const Vec2> points, double eps, int min_pts) {
  const size_t n = points.size();
  std::vector<std::vector<size_t>> clusters;
  if (n == 0) return clusters;

  // Uniform grid with eps-sized buckets for the range queries.
  std::unordered_map<uint64_t, std::vector<size_t>> grid;
  auto bucket = [&](Vec2 p) {
    return Cell{static_cast<int>(std::floor(p.x / eps)), static_cast<int>(std::floor(p.y / eps))};
  };
  for (size_t i = 0; i < n; ++i) grid[cell_key(bucket(points[i]))].push_back(i);
  auto region = [&](size_t i) {
    std::vector<size_t> out;
    const Cell b = bucket(points[i]);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const auto it = grid.find(cell_key({b.x + dx, b.y + dy}));
        if (it == grid.end()) continue;
        for (size_t j : it->second)
          if (distance(points[i], points[j]) <= eps) out.push_back(j);
      }
    std::sort(out.begin(), out.end());
    return out;
  };

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  int next = 0;
  for (size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto seeds = region(i);
    if (static_cast<int>(seeds.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int id = next++;
    label[i] = id;
    std::queue<size_t> frontier;
    for (size_t j : seeds) frontier.push(j);
    while (!frontier.empty()) {
      const size_t j = frontier.front();
      frontier.pop();
      if (label[j] == kNoise) label[j] = id;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = id;
      auto nb = region(j);
      if (static_cast<int>(nb.size()) >= min_pts)
        for (size_t k : nb)
          if (label[k] == kUnvisited || label[k] == kNoise) frontier.push(k);
    }
  }

  std::vector<std::vector<size_t>> by_id(next);
  std::vector<std::vector<size_t>> noise;
  for (size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) by_id[label[i]].push_back(i);
    else noise.push_back({i});
  }
  for (auto& c : by_id) clusters.push_back(std::move(c));
  for (auto& c : noise) clusters.push_back(std::move(c));
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return clusters;
}

std::vector<Pose> find_closest_poses(const TrailNetwork& net, const GoalPoseQuery& q) {
  q.validate();
  const Vec2 goal = q.g_o.pos();
  if (net.empty()) return {q.g_o};

  auto to_pose = [&](uint32_t i) {
    const Cell c = net.points()[i];
    return Pose{double(c.x), double(c.y), q.g_o.theta};
  };

  // Grow the rectangle until some trail pixel lies wholly inside it.
  std::vector<uint32_t> covered;
  for (double md = q.poly_md, sd = q.poly_sd; md <= q.poly_md_max && sd <= q.poly_sd_max;
       md += q.md_i, sd += q.sd_i) {
    const auto rect = query_polygon(goal, q.main_heading, md, sd);
    covered = points_covered_by(net, rect);
    if (!covered.empty()) break;
  }

  if (covered.empty()) {
    // Second sweep accepts pixels that only touch the rectangle.
    for (double md = q.poly_md, sd = q.poly_sd; md <= q.poly_md_max && sd <= q.poly_sd_max;
         md += q.md_i, sd += q.sd_i) {
      const auto rect = query_polygon(goal, q.main_heading, md, sd);
      const auto hit = points_intersecting(net, rect);
      if (hit.empty()) continue;
      std::vector<Pose> out;
      for (uint32_t i : hit) out.push_back(to_pose(i));
      return out;
    }
    return {q.g_o};
  }

  std::vector<Vec2> pts;
  pts.reserve(covered.size());
  for (uint32_t i : covered) pts.push_back(net.points()[i].center());
  const auto clusters = dbscan(pts, q.dbscan_eps, q.dbscan_min_pts);
  std::vector<Pose> out;
  for (const auto& cluster : clusters) {
    size_t best = cluster.front();
    double best_d = distance(pts[best], goal);
    for (size_t k : cluster) {
      const double d = distance(pts[k], goal);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out.push_back(to_pose(covered[best]));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<Cell> snap_to_trail(const IntermediateMap& map, Cell c, double radius) {
  if (map.in_bounds(c) && map.at(c) == CellClass::Trail) return c;
  const int r = static_cast<int>(std::ceil(radius));
  std::optional<Cell> best;
  double best_d = kInf;
  for (int y = c.y - r; y <= c.y + r; ++y)
    for (int x = c.x - r; x <= c.x + r; ++x) {
      if (!map.in_bounds(x, y) || map.at(x, y) != CellClass::Trail) continue;
      const double d = std::hypot(double(x - c.x), double(y - c.y));
      if (d <= radius && d < best_d) {
        best_d = d;
        best = Cell{x, y};
      }
    }
  return best;
}

DistanceField wavefront_distance(const IntermediateMap& map, Cell start, double snap_radius) {
  const auto src = snap_to_trail(map, start, snap_radius);
  if (!src)
    throw PlanningError(ErrorKind::NoTrailNearStart, "no trail cell near the distance-map source",
                        "wavefront");
  DistanceField field{map.width(), map.height(), std::vector<double>(map.size(), kInf), *src};
  using Item = std::pair<double, size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const size_t s = map.index(src->x, src->y);
  field.values[s] = 0.0;
  open.push({0.0, s});
  while (!open.empty()) {
    const auto [d, i] = open.top();
    open.pop();
    if (d > field.values[i]) continue;
    const Cell c = map.cell_at(i);
    for (int k = 0; k < 8; ++k) {
      const int x = c.x + kDx[k], y = c.y + kDy[k];
      if (!map.in_bounds(x, y) || map.at(x, y) != CellClass::Trail) continue;
      const size_t j = map.index(x, y);
      const double nd = d + (k < 4 ? 1.0 : kSqrt2);
      if (nd < field.values[j]) {
        field.values[j] = nd;
        open.push({nd, j});
      }
    }
  }
  return field;
}

TrailPath dijkstra_trail_path(const IntermediateMap& map, const DistanceField& field, Cell t,
                              double snap_radius) {
  const auto target = snap_to_trail(map, t, snap_radius);
  if (!target || std::isinf(field.at(*target)))
    throw PlanningError(ErrorKind::NoTrailPath, "target is not connected to the source on the trail network",
                        "trail");
  TrailPath out;
  out.length = field.at(*target);
  std::vector<Vec2> rev{target->center()};
  Cell c = *target;
  while (!(c == field.source)) {
    const double vc = field.at(c);
    Cell best = c;
    double best_v = kInf;
    for (int k = 0; k < 8; ++k) {
      const Cell n{c.x + kDx[k], c.y + kDy[k]};
      if (!field.in_bounds(n)) continue;
      const double vn = field.at(n);
      if (std::isinf(vn)) continue;
      const double step = k < 4 ? 1.0 : kSqrt2;
      if (std::abs(vn + step - vc) <= 1e-9 * std::max(1.0, vc) && vn < best_v) {
        best_v = vn;
        best = n;
      }
    }
    if (best == c)
      throw PlanningError(ErrorKind::NoTrailPath, "inconsistent distance field", "trail");
    c = best;
    rev.push_back(c.center());
  }
  out.points.assign(rev.rbegin(), rev.rend());
  return out;
}

PairSelection select_optimal_pair(std::span<const Pose> candidates_s, std::span<const Pose> candidates_t,
                                  const TrailNetwork& net) {
  if (candidates_s.empty() || candidates_t.empty())
    throw PlanningError(ErrorKind::InvalidArgument, "candidate lists must be non-empty", "trail");
  if (net.empty() || net.down_map().size() == 0)
    throw PlanningError(ErrorKind::NoTrailPath, "trail network is empty", "trail");
  const IntermediateMap& dm = net.down_map();
  const double snap = 3.0;  // downsampled cells, i.e. 3 * df full-resolution pixels
  std::optional<PairSelection> best;
  for (size_t si = 0; si < candidates_s.size(); ++si) {
    const Cell s_down = net.to_down(candidates_s[si].pos());
    DistanceField field;
    try {
      field = wavefront_distance(dm, s_down, snap);
    } catch (const PlanningError& e) {
      if (e.kind() == ErrorKind::NoTrailNearStart) continue;
      throw;
    }
    for (size_t ti = 0; ti < candidates_t.size(); ++ti) {
      const Cell t_down = net.to_down(candidates_t[ti].pos());
      const auto tc = snap_to_trail(dm, t_down, snap);
      if (!tc || std::isinf(field.at(*tc))) continue;
      const double len = field.at(*tc);
      if (!best || len < best->length) {
        TrailPath path = dijkstra_trail_path(dm, field, *tc, snap);
        best = PairSelection{si, ti, std::move(path), len};
      }
    }
  }
  if (!best)
    throw PlanningError(ErrorKind::NoTrailPath, "no candidate pair is connected by trails", "trail");
  return *best;
}

PixelPath upsample_trail_path(const TrailNetwork& net, const PixelPath& down_path) {
  PixelPath out;
  for (const Vec2& p : down_path) {
    const Vec2 full = net.to_full(cell_of(p)).center();
    if (out.empty() || !(out.back() == full)) out.push_back(full);
  }
  return out;
}

}  // namespace offroad
