#include "offroad/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "offroad/memory.hpp"
#include "offroad/metrics.hpp"

namespace offroad {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  StageTimer() : start_(Clock::now()), last_(start_) {}
  void mark(const std::string& stage) {
    const auto now = Clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    for (auto& [name, v] : stages_)
      if (name == stage) {
        v += ms;
        return;
      }
    stages_.emplace_back(stage, ms);
  }
  double total_ms() const { return std::chrono::duration<double, std::milli>(Clock::now() - start_).count(); }
  std::vector<std::pair<std::string, double>> stages() const { return stages_; }

 private:
  Clock::time_point start_, last_;
  std::vector<std::pair<std::string, double>> stages_;
};

uint64_t cell_key(Cell c) { return (uint64_t(uint32_t(c.y)) << 32) | uint32_t(c.x); }

bool on_trail(CellClass c) { return c == CellClass::Trail || c == CellClass::PassableOverride; }

void append(PixelPath& out, const PixelPath& part) {
  for (const Vec2& p : part)
    if (out.empty() || distance(out.back(), p) > 1e-9) out.push_back(p);
}

// Joins two nearby trail cells through trail cells, or through the off-trail
// grid when the trail does not connect them at full resolution.
PixelPath trail_connect(const IntermediateMap& map, const ClearanceMap& grid, Cell a, Cell b,
                        const Deadline& deadline) {
  if (a == b) return {a.center()};
  constexpr int kMargin = 16;
  const int x0 = std::max(0, std::min(a.x, b.x) - kMargin), y0 = std::max(0, std::min(a.y, b.y) - kMargin);
  const int x1 = std::min(map.width() - 1, std::max(a.x, b.x) + kMargin);
  const int y1 = std::min(map.height() - 1, std::max(a.y, b.y) + kMargin);
  IntermediateMap win(x1 - x0 + 1, y1 - y0 + 1, {}, CellClass::Obstacle);
  auto cells = win.mutable_cells();
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (on_trail(map.at(x, y))) cells[win.index(x - x0, y - y0)] = CellClass::Free;
  const ClearanceMap wgrid(win);
  const Cell la{a.x - x0, a.y - y0}, lb{b.x - x0, b.y - y0};
  if (wgrid.passable(la) && wgrid.passable(lb)) {
    try {
      PixelPath out = astar(wgrid, la, lb, deadline).points;
      for (Vec2& p : out) p += Vec2{double(x0), double(y0)};
      return out;
    } catch (const PlanningError& e) {
      if (e.kind() != ErrorKind::NoGridPath) throw;
    }
  }
  return astar(grid, a, b, deadline).points;
}

std::string overlay_key(const std::vector<AreaOverlay>& overlays) {
  std::ostringstream os;
  os << std::hexfloat;
  for (const auto& o : overlays) {
    os << (o.kind == OverlayKind::Restricted ? 'R' : 'P');
    for (const Vec2& p : o.polygon) os << p.x << ',' << p.y << ';';
    os << '|';
  }
  return os.str();
}

size_t nearest_index(const PixelPath& path, Vec2 q, size_t from = 0) {
  size_t best = from;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = from; i < path.size(); ++i) {
    const double d = distance(path[i], q);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

PixelPath slice_path(const PixelPath& p, size_t a, size_t b) { return PixelPath(p.begin() + a, p.begin() + b + 1); }

}  // namespace

const char* to_string(PlanMode m) { return m == PlanMode::Direct ? "DIRECT" : "TRAIL_PREFERRED"; }

const char* to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::OffroadStart: return "OFFROAD_START";
    case SegmentKind::Trail: return "TRAIL";
    case SegmentKind::OffroadEnd: return "OFFROAD_END";
    case SegmentKind::Direct: return "DIRECT";
  }
  return "?";
}

// ---------------------------------------------------------------------------

PlanResult plan_on_layer(const PlanRequest& req, const IntermediateMap& map, const TrailNetwork& net) {
  reset_peak_rss();
  StageTimer timer;
  const PlannerParams& P = req.params;
  const Deadline deadline =
      P.time_budget_s > 0 ? Deadline(std::chrono::duration<double>(P.time_budget_s)) : Deadline::none();

  for (double v : {req.start.lon, req.start.lat, req.target.lon, req.target.lat})
    if (!std::isfinite(v)) throw PlanningError(ErrorKind::InvalidArgument, "coordinates must be finite", "request");
  const double mpp = map.meters_per_pixel();
  const KinematicModel model(req.wheelbase_m, req.phi_max, mpp);
  const Vec2 s_px = geo_to_pixel(req.start.lon, req.start.lat, map.transform());
  const Vec2 t_px = geo_to_pixel(req.target.lon, req.target.lat, map.transform());
  const Cell s = cell_of(s_px), t = cell_of(t_px);
  if (!map.in_bounds(s)) throw PlanningError(ErrorKind::InvalidArgument, "start lies outside the map", "request");
  if (!map.in_bounds(t)) throw PlanningError(ErrorKind::InvalidArgument, "target lies outside the map", "request");
  if (s == t) throw PlanningError(ErrorKind::InvalidArgument, "start and target coincide", "request");
  if (!map.is_traversable(s))
    throw PlanningError(ErrorKind::NoGridPath, "start cell is not traversable", "grid_search");
  if (!map.is_traversable(t))
    throw PlanningError(ErrorKind::NoGridPath, "target cell is not traversable", "grid_search");

  const ClearanceMap inflated(map, 0.5 * P.vehicle_width_m / mpp);
  const ClearanceMap plain(map);
  const ClearanceMap comfort(map, 0.5 * P.vehicle_width_m / mpp + std::max(0.0, P.clearance_margin_m) / mpp);
  auto grid_for = [&](Cell a, Cell b) -> const ClearanceMap& {
    return inflated.passable(a) && inflated.passable(b) ? inflated : plain;
  };

  PlanResult res;
  res.mode_used = req.mode;
  res.meters_per_pixel = mpp;
  res.transform = map.transform();
  res.k_max = model.k_max();

  bool direct = req.mode == PlanMode::Direct || net.empty();
  res.fell_back_to_direct = req.mode != PlanMode::Direct && direct;
  PixelPath trail;
  Cell sb{}, tb{};
  if (!direct) {
    try {
      GoalPoseQuery q;
      q.poly_md = P.poly_md;
      q.poly_sd = P.poly_sd;
      q.poly_md_max = P.poly_md_max;
      q.poly_sd_max = P.poly_sd_max;
      q.md_i = P.md_i;
      q.sd_i = P.sd_i;
      q.dbscan_eps = P.dbscan_eps;
      q.dbscan_min_pts = P.dbscan_min_pts;
      q.g_o = {s_px.x, s_px.y, req.start.heading.value_or(heading(s_px, t_px))};
      q.main_heading = heading(s_px, t_px);
      const auto cands_s = find_closest_poses(net, q);
      q.g_o = {t_px.x, t_px.y, req.target.heading.value_or(heading(s_px, t_px))};
      q.main_heading = heading(t_px, s_px);
      const auto cands_t = find_closest_poses(net, q);
      timer.mark("candidates");

      const PairSelection sel = select_optimal_pair(cands_s, cands_t, net);
      const PixelPath up = upsample_trail_path(net, sel.down_path.points);
      sb = cell_of(cands_s[sel.s_index].pos());
      tb = cell_of(cands_t[sel.t_index].pos());
      if (map.at(sb) != CellClass::Trail) sb = cell_of(up.front());
      if (map.at(tb) != CellClass::Trail) tb = cell_of(up.back());
      std::vector<Cell> chain{sb};
      for (const Vec2& p : up)
        if (!(cell_of(p) == chain.back())) chain.push_back(cell_of(p));
      if (!(tb == chain.back())) chain.push_back(tb);
      trail.push_back(sb.center());
      for (size_t i = 0; i + 1 < chain.size(); ++i)
        append(trail, trail_connect(map, grid_for(chain[i], chain[i + 1]), chain[i], chain[i + 1], deadline));
      timer.mark("trail");
    } catch (const PlanningError& e) {
      if (e.kind() != ErrorKind::NoTrailPath && e.kind() != ErrorKind::NoTrailNearStart) throw;
      direct = true;
      res.fell_back_to_direct = true;
      trail.clear();
    }
  }

  PixelPath leg_s, leg_t;
  try {
    if (direct) {
      leg_s = grid_search(req.planner, grid_for(s, t), s, t, deadline).points;
    } else {
      if (!(s == sb)) leg_s = grid_search(req.planner, grid_for(s, sb), s, sb, deadline).points;
      if (!(tb == t)) leg_t = grid_search(req.planner, grid_for(tb, t), tb, t, deadline).points;
    }
  } catch (const PlanningError& e) {
    throw e.with_stage("grid_search");
  }
  timer.mark("grid_search");

  if (P.simplify) {
    // Shortcuts stay in the wider clearance zone or on cells the grid path
    // already uses.
    auto simplify_on = [&](const PixelPath& p) {
      std::unordered_set<uint64_t> used;
      for (const Vec2& q : p) used.insert(cell_key(cell_of(q)));
      return simplify_line_of_sight(
          p, [&](int x, int y) { return comfort.passable(x, y) || used.count(cell_key({x, y})) > 0; });
    };
    if (direct) {
      leg_s = simplify_on(leg_s);
    } else {
      if (!leg_s.empty()) leg_s = simplify_on(leg_s);
      if (!leg_t.empty()) leg_t = simplify_on(leg_t);
      trail = simplify_line_of_sight(trail, [&](int x, int y) { return map.in_bounds(x, y) && on_trail(map.at(x, y)); });
    }
    timer.mark("simplify");
  }

  PixelPath path;
  append(path, leg_s);
  append(path, trail);
  append(path, leg_t);
  const Vec2 sbv = sb.center(), tbv = tb.center();

  // Kinematic repair and smoothing run against the inflated map unless the
  // path already needs the uninflated one (e.g. an endpoint next to a wall).
  const bool path_clear = [&] {
    for (size_t i = 0; i + 1 < path.size(); ++i)
      if (!line_of_sight(path[i], path[i + 1], [&](int x, int y) { return inflated.passable(x, y); }))
        return false;
    return true;
  }();
  const ClearanceMap& work = path_clear ? inflated : plain;

  RepairOptions ropts;
  ropts.initial_offset = P.slice_offset;
  ropts.search.max_expansions = P.max_expansions;
  ropts.preferred = {&comfort};
  if (P.repair && path.size() >= 3) {
    const PixelPath dense = densify(path, 2.0);
    RepairReport rr = repair_path(dense, work, model, ropts, deadline);
    res.repaired_segments += rr.segments_repaired;
    path = std::move(rr.path);
    timer.mark("repair");

    if (P.smooth) {
      std::vector<uint8_t> frozen(path.size(), 0);
      for (const auto& [a, b] : rr.replanned) frozen[a] = frozen[b] = 1;
      if (!direct)
        for (Vec2 j : {sbv, tbv}) {
          const size_t k = nearest_index(path, j);
          if (distance(path[k], j) < 1e-9) frozen[k] = 1;
        }
      SmoothingParams sp;
      sp.lambda_o = P.lambda_o;
      sp.lambda_k = P.lambda_k;
      sp.lambda_s = P.lambda_s;
      sp.k_max = model.k_max();
      sp.meters_per_pixel = mpp;
      sp.max_iterations = P.max_iterations;
      const int margin = static_cast<int>(std::ceil(P.d_o_max)) + 2;
      PixelPath out{path.front()};
      const size_t chunk = std::max<size_t>(P.smooth_chunk, 8);
      for (size_t c0 = 0; c0 + 1 < path.size();) {
        const size_t c1 = std::min(path.size() - 1, c0 + chunk);
        PixelPath sub(path.begin() + c0, path.begin() + c1 + 1);
        std::vector<uint8_t> fz(frozen.begin() + c0, frozen.begin() + c1 + 1);
        Cell lo = cell_of(sub.front()), hi = lo;
        for (const Vec2& p : sub) {
          const Cell c = cell_of(p);
          lo = {std::min(lo.x, c.x), std::min(lo.y, c.y)};
          hi = {std::max(hi.x, c.x), std::max(hi.y, c.y)};
        }
        const auto field = build_voronoi_field_window(map, {lo.x - margin, lo.y - margin},
                                                      {hi.x + margin, hi.y + margin}, P.alpha, P.d_o_max);
        const SmoothResult sr = smooth_path(sub, comfort, field, sp, fz, {&work});
        out.insert(out.end(), sr.path.begin() + 1, sr.path.end());
        c0 = c1;
        deadline.check("smooth");
      }
      path = std::move(out);
      timer.mark("smooth");

      RepairReport final_pass = repair_path(path, work, model, ropts, deadline);
      res.repaired_segments += final_pass.segments_repaired;
      path = std::move(final_pass.path);
      timer.mark("repair");
    }
  }

  PixelPath clean;
  append(clean, path);
  res.path = densify(clean, 2.0);

  if (direct) {
    res.segments.push_back({SegmentKind::Direct, res.path});
  } else {
    const size_t is = nearest_index(res.path, sbv);
    const size_t it = nearest_index(res.path, tbv, is);
    if (is > 0) res.segments.push_back({SegmentKind::OffroadStart, slice_path(res.path, 0, is)});
    if (it > is) res.segments.push_back({SegmentKind::Trail, slice_path(res.path, is, it)});
    if (it + 1 < res.path.size())
      res.segments.push_back({SegmentKind::OffroadEnd, slice_path(res.path, it, res.path.size() - 1)});
    if (res.segments.empty()) res.segments.push_back({SegmentKind::Trail, res.path});
    const auto joint_heading = [&](size_t i) {
      const PixelPath& p = res.path;
      if (p.size() < 2) return 0.0;
      return i + 1 < p.size() ? heading(p[i], p[i + 1]) : heading(p[i - 1], p[i]);
    };
    res.s_bar = Pose{sbv.x, sbv.y, joint_heading(is)};
    res.t_bar = Pose{tbv.x, tbv.y, joint_heading(it)};
  }

  res.geo.reserve(res.path.size());
  for (const Vec2& p : res.path) res.geo.push_back(pixel_to_geo(p.x, p.y, map.transform()));
  timer.mark("project");

  res.metrics.length_m = path_length(res.path) * mpp;
  res.metrics.max_curvature = max_vertex_curvature(res.path) / mpp;
  res.metrics.csd = res.path.size() >= 3 ? csd(res.path, mpp) : 0.0;
  res.metrics.mod = min_obstacle_distance(res.path, map, mpp);
  timer.mark("metrics");
  res.metrics.stage_ms = timer.stages();
  res.metrics.total_ms = timer.total_ms();
  res.metrics.peak_memory_bytes = peak_rss_bytes();
  return res;
}

PlanResult plan(const PlanRequest& request, const IntermediateMap& map, const TrailNetwork& net) {
  if (request.overlays.empty()) return plan_on_layer(request, map, net);
  const IntermediateMap overlaid = apply_overlays(map, request.overlays);
  const TrailNetwork layer_net = TrailNetwork::build(overlaid, net.df());
  return plan_on_layer(request, overlaid, layer_net);
}

// ---------------------------------------------------------------------------

PlanningContext::PlanningContext(IntermediateMap base, double df) : df_(df) {
  auto layer = std::make_shared<MapLayer>();
  layer->net = TrailNetwork::build(base, df);
  layer->map = std::move(base);
  base_ = std::move(layer);
}

std::shared_ptr<const MapLayer> PlanningContext::layer(const std::vector<AreaOverlay>& overlays) {
  if (overlays.empty()) return base_;
  const std::string key = overlay_key(overlays);
  std::lock_guard lock(mu_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto layer = std::make_shared<MapLayer>();
  layer->map = apply_overlays(base_->map, overlays);
  layer->net = TrailNetwork::build(layer->map, df_);
  if (cache_.size() >= 8) cache_.erase(cache_.begin());
  cache_.emplace(key, layer);
  return layer;
}

PlanResult PlanningContext::plan(const PlanRequest& request) {
  const auto t0 = Clock::now();
  const auto l = layer(request.overlays);
  const double overlay_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  PlanResult r = plan_on_layer(request, l->map, l->net);
  r.metrics.stage_ms.insert(r.metrics.stage_ms.begin(), {"overlays", overlay_ms});
  r.metrics.total_ms += overlay_ms;
  return r;
}

PlanResult replan_with_overlays(PlanningContext& ctx, const PlanRequest& previous, std::vector<AreaOverlay> overlays) {
  PlanRequest next = previous;
  next.overlays = std::move(overlays);
  return ctx.plan(next);
}

}  // namespace offroad
