#include "offroad/kino.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_map>

#include "offroad/dubins.hpp"

namespace offroad {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> cumulative_length(const PixelPath& path) {
  std::vector<double> cum(path.size(), 0.0);
  for (size_t i = 1; i < path.size(); ++i) cum[i] = cum[i - 1] + distance(path[i - 1], path[i]);
  return cum;
}

Vec2 rotate(Vec2 v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Constant-curvature motion over signed length `len`.
Pose arc_pose(const Pose& p, double kappa, double len) {
  if (std::abs(kappa) < 1e-12)
    return {p.x + len * std::cos(p.theta), p.y + len * std::sin(p.theta), p.theta};
  const double th = p.theta + kappa * len;
  return {p.x + (std::sin(th) - std::sin(p.theta)) / kappa, p.y - (std::cos(th) - std::cos(p.theta)) / kappa,
          wrap_angle(th)};
}

}  // namespace

// ---------------------------------------------------------------------------

KinematicModel::KinematicModel(double wheelbase_m, double phi_max, double meters_per_pixel)
    : wheelbase_(wheelbase_m), phi_max_(phi_max), mpp_(meters_per_pixel) {
  if (!(wheelbase_ > 0)) throw PlanningError(ErrorKind::InvalidArgument, "wheelbase must be positive");
  if (!(phi_max_ > 0 && phi_max_ < kPi / 2))
    throw PlanningError(ErrorKind::InvalidArgument, "steering limit must lie in (0, pi/2)");
  if (!(mpp_ > 0)) throw PlanningError(ErrorKind::InvalidArgument, "map scale must be positive");
}

double min_turning_radius(const KinematicModel& model) { return model.rho_min(); }

Pose bicycle_derivative(const Pose& q, double u_s, double u_phi, double wheelbase) {
  return {u_s * std::cos(q.theta), u_s * std::sin(q.theta), u_s * std::tan(u_phi) / wheelbase};
}

Pose bicycle_rk4_step(const Pose& q, double u_s, double u_phi, double wheelbase, double dt) {
  auto add = [](const Pose& a, const Pose& d, double h) {
    return Pose{a.x + h * d.x, a.y + h * d.y, a.theta + h * d.theta};
  };
  const Pose k1 = bicycle_derivative(q, u_s, u_phi, wheelbase);
  const Pose k2 = bicycle_derivative(add(q, k1, dt / 2), u_s, u_phi, wheelbase);
  const Pose k3 = bicycle_derivative(add(q, k2, dt / 2), u_s, u_phi, wheelbase);
  const Pose k4 = bicycle_derivative(add(q, k3, dt), u_s, u_phi, wheelbase);
  return {q.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), q.y + dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          q.theta + dt / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta)};
}

double corner_center_distance(double alpha, double rho, double eps) {
  return rho / (std::sin(alpha / 2) + eps);
}

std::vector<double> vertex_curvatures(const PixelPath& path) {
  std::vector<double> k(path.size(), 0.0);
  for (size_t i = 1; i + 1 < path.size(); ++i) k[i] = menger_curvature(path[i - 1], path[i], path[i + 1]);
  return k;
}

double max_vertex_curvature(const PixelPath& path) {
  const auto k = vertex_curvatures(path);
  return k.empty() ? 0.0 : *std::max_element(k.begin(), k.end());
}

Pose pose_at_arclength(const PixelPath& path, double s) {
  if (path.empty()) throw PlanningError(ErrorKind::InvalidArgument, "empty path");
  if (path.size() == 1) return {path[0].x, path[0].y, 0.0};
  double acc = 0.0;
  for (size_t i = 1; i < path.size(); ++i) {
    const double len = distance(path[i - 1], path[i]);
    if (len <= 0) continue;
    if (s <= acc + len || i + 1 == path.size()) {
      const double t = std::clamp((s - acc) / len, 0.0, 1.0);
      const Vec2 p = path[i - 1] + (path[i] - path[i - 1]) * t;
      return {p.x, p.y, heading(path[i - 1], path[i])};
    }
    acc += len;
  }
  return {path.back().x, path.back().y, 0.0};
}

std::vector<InfeasibleVertex> find_infeasible_vertices(const PixelPath& path, const KinematicModel& model,
                                                       const FeasibilityOptions& opts) {
  std::vector<InfeasibleVertex> out;
  if (path.size() < 3) return out;
  const double rho = model.rho_min_px();
  const double limit = model.k_max_px() * (1.0 + opts.tolerance);
  const auto cum = cumulative_length(path);
  const double total = cum.back();
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    if (menger_curvature(path[i - 1], path[i], path[i + 1]) <= limit) continue;
    const Vec2 q = path[i];
    const Vec2 qp = path[i - 1] - q, qr = path[i + 1] - q;
    const double alpha = std::acos(std::clamp(qp.dot(qr) / (qp.norm() * qr.norm()), -1.0, 1.0));
    InfeasibleVertex v;
    v.index = i;
    v.Q = {q.x, q.y, heading(path[i - 1], q)};
    v.alpha = alpha;
    v.s = corner_center_distance(alpha, rho, opts.eps);
    // Turn the QR direction by alpha/2 toward QP to land on the bisector.
    const double side = qr.cross(qp) >= 0 ? 1.0 : -1.0;
    const Vec2 a = q + rotate(qr / qr.norm(), side * alpha / 2) * v.s;
    v.A = {a.x, a.y, 0.0};
    const double tangent = std::sqrt(std::max(0.0, v.s * v.s - rho * rho));
    const double run = tangent + opts.anchor_margin * rho;
    v.arc_q1 = std::max(0.0, cum[i] - run);
    v.arc_q2 = std::min(total, cum[i] + run);
    v.Q1 = pose_at_arclength(path, v.arc_q1);
    v.Q2 = pose_at_arclength(path, v.arc_q2);
    out.push_back(v);
  }
  return out;
}

std::vector<RepairSegment> repair_segments(const PixelPath& path, const KinematicModel& model,
                                           const FeasibilityOptions& opts) {
  const auto verts = find_infeasible_vertices(path, model, opts);
  std::vector<RepairSegment> segs;
  for (const auto& v : verts) {
    if (!segs.empty() && v.arc_q1 <= segs.back().arc_end) {
      segs.back().arc_end = std::max(segs.back().arc_end, v.arc_q2);
      segs.back().vertices.push_back(v.index);
    } else {
      segs.push_back({v.arc_q1, v.arc_q2, {}, {}, {v.index}});
    }
  }
  for (auto& s : segs) {
    s.q1 = pose_at_arclength(path, s.arc_begin);
    s.q2 = pose_at_arclength(path, s.arc_end);
  }
  return segs;
}

// ---------------------------------------------------------------------------

PixelPath hybrid_astar(const MapSlice& slice, Pose q1, Pose q2, const KinematicModel& model,
                       const HybridAStarOptions& opts, const ClearanceMap* parent, const Deadline& deadline) {
  const double rho = model.rho_min_px();
  const double kappa = 1.0 / rho;
  const IntermediateMap& sub = slice.submap;
  std::optional<ClearanceMap> local;
  if (!parent) local.emplace(sub, opts.clearance);

  const Vec2 s_xy = slice.to_slice(q1.pos()), g_xy = slice.to_slice(q2.pos());
  const Pose start{s_xy.x, s_xy.y, slice.to_slice_heading(q1.theta)};
  const Pose goal{g_xy.x, g_xy.y, slice.to_slice_heading(q2.theta)};

  auto free = [&](double x, double y) {
    // The anchors themselves come from a valid path; only their neighbourhood is exempt.
    if (std::hypot(x - start.x, y - start.y) < 0.5 || std::hypot(x - goal.x, y - goal.y) < 0.5) return true;
    const Cell c = cell_of({x, y});
    if (!sub.in_bounds(c)) return false;
    if (parent) return parent->passable(cell_of(slice.to_parent({x, y})));
    return local->passable(c);
  };
  auto motion_free = [&](const Pose& from, double k, double len) {
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(len) / opts.collision_step)));
    for (int i = 1; i <= n; ++i) {
      const Pose p = arc_pose(from, k, len * i / n);
      if (!free(p.x, p.y)) return false;
    }
    return true;
  };
  auto dubins_free = [&](const DubinsPath& d) {
    for (const Pose& p : d.sample(opts.collision_step))
      if (!free(p.x, p.y)) return false;
    return true;
  };
  auto heuristic = [&](const Pose& p) {
    if (opts.allow_reverse) return std::hypot(goal.x - p.x, goal.y - p.y);
    return dubins_length(p, goal, rho);
  };

  const int bins = opts.heading_bins;
  auto key = [&](const Pose& p) {
    const Cell c = cell_of(p.pos());
    int b = static_cast<int>(std::floor((wrap_angle(p.theta) + kPi) / (2 * kPi) * bins));
    b = std::clamp(b, 0, bins - 1);
    return (static_cast<uint64_t>(static_cast<uint32_t>(c.y)) << 32) |
           (static_cast<uint64_t>(static_cast<uint32_t>(c.x) & 0xffffff) << 8) | static_cast<uint64_t>(b);
  };

  struct Node {
    Pose pose;
    double g;
    int parent;
    double k;    // curvature of the motion that reached this node
    double len;  // signed length of that motion
  };
  struct Entry {
    double f, g;
    int idx;
    bool operator<(const Entry& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;
      return idx > o.idx;
    }
  };
  std::vector<Node> nodes{{start, 0.0, -1, 0.0, 0.0}};
  std::unordered_map<uint64_t, int> best{{key(start), 0}};
  std::unordered_map<uint64_t, bool> closed;
  std::priority_queue<Entry> open;
  open.push({heuristic(start), 0.0, 0});

  std::vector<std::pair<double, double>> motions;  // (curvature, signed length)
  for (double k : {kappa, 0.0, -kappa}) motions.push_back({k, opts.primitive_length});
  if (opts.allow_reverse)
    for (double k : {kappa, 0.0, -kappa}) motions.push_back({k, -opts.primitive_length});

  std::optional<DubinsPath> tail;
  int reached = -1;
  size_t expanded = 0;
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    const Node cur = nodes[e.idx];
    const uint64_t k0 = key(cur.pose);
    if (closed[k0]) continue;
    if (best[k0] != e.idx) continue;
    closed[k0] = true;
    if (++expanded > opts.max_expansions) break;
    if ((expanded & 1023) == 0) deadline.check("kino");

    const double h = e.f - e.g;
    if (h < 6 * rho || expanded % 8 == 1) {
      auto d = dubins_shortest(cur.pose, goal, rho);
      if (d && dubins_free(*d)) {
        tail = d;
        reached = e.idx;
        break;
      }
    }
    for (const auto& [mk, ml] : motions) {
      if (!motion_free(cur.pose, mk, ml)) continue;
      const Pose np = arc_pose(cur.pose, mk, ml);
      const uint64_t nk = key(np);
      if (closed.count(nk) && closed[nk]) continue;
      const double ng = cur.g + std::abs(ml) * (ml < 0 ? 1.5 : 1.0);
      const auto it = best.find(nk);
      if (it != best.end() && nodes[it->second].g <= ng) continue;
      const double nh = heuristic(np);
      if (std::isinf(nh)) continue;
      nodes.push_back({np, ng, e.idx, mk, ml});
      const int ni = static_cast<int>(nodes.size()) - 1;
      best[nk] = ni;
      open.push({ng + nh, ng, ni});
    }
  }
  if (reached < 0)
    throw PlanningError(ErrorKind::SliceExhausted, "no feasible path inside the slice", "kino");

  std::vector<int> chain;
  for (int i = reached; i >= 0; i = nodes[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());
  PixelPath out{q1.pos()};
  for (size_t c = 1; c < chain.size(); ++c) {
    const Node& n = nodes[chain[c]];
    const Pose from = nodes[n.parent].pose;
    const int steps = std::max(1, static_cast<int>(std::round(std::abs(n.len) / opts.sample_step)));
    for (int i = 1; i <= steps; ++i) out.push_back(slice.to_parent(arc_pose(from, n.k, n.len * i / steps).pos()));
  }
  const auto samples = tail->sample(opts.sample_step);
  for (size_t i = 1; i < samples.size(); ++i) out.push_back(slice.to_parent(samples[i].pos()));
  if (out.size() == 1) out.push_back(q2.pos());
  out.back() = q2.pos();
  return out;
}

// ---------------------------------------------------------------------------

RepairReport repair_path(const PixelPath& path, const ClearanceMap& map, const KinematicModel& model,
                         const RepairOptions& opts, const Deadline& deadline) {
  RepairReport rep;
  PixelPath cur = path;
  std::vector<uint8_t> flag(cur.size(), 0);
  const double diag = std::hypot(double(map.width()), double(map.height()));

  for (int round = 0; round < opts.max_rounds; ++round) {
    const auto segs = repair_segments(cur, model, opts.feasibility);
    if (segs.empty()) break;
    const auto cum = cumulative_length(cur);
    PixelPath next;
    std::vector<uint8_t> next_flag;
    size_t i = 0;
    for (size_t k = 0; k < segs.size(); ++k) {
      const RepairSegment& seg = segs[k];
      while (i < cur.size() && cum[i] < seg.arc_begin - 1e-9) {
        next.push_back(cur[i]);
        next_flag.push_back(flag[i]);
        ++i;
      }
      // Drop a kept vertex that would sit almost on top of the anchor.
      if (next.size() > 1 && distance(next.back(), seg.q1.pos()) < 0.25) {
        next.pop_back();
        next_flag.pop_back();
      }

      PixelPath piece;
      if (!opts.preferred.empty()) {
        HybridAStarOptions quick = opts.search;
        quick.max_expansions = std::min(quick.max_expansions, opts.preferred_expansions);
        const double d = opts.initial_offset;
        if (slice_cell_count(map.map(), seg.q1.pos(), seg.q2.pos(), d, d) <= opts.max_slice_cells) {
          const MapSlice slice = slice_map(map.map(), seg.q1.pos(), seg.q2.pos(), d, d);
          for (const ClearanceMap* pref : opts.preferred) {
            try {
              piece = hybrid_astar(slice, seg.q1, seg.q2, model, quick, pref, deadline);
              break;
            } catch (const PlanningError& e) {
              if (e.kind() != ErrorKind::SliceExhausted) throw;
            }
          }
        }
      }
      for (double d = opts.initial_offset; piece.empty(); d *= opts.growth) {
        if (slice_cell_count(map.map(), seg.q1.pos(), seg.q2.pos(), d, d) > opts.max_slice_cells)
          throw PlanningError(ErrorKind::SliceExhausted, "slice grew past the cell budget", "kino", k);
        const MapSlice slice = slice_map(map.map(), seg.q1.pos(), seg.q2.pos(), d, d);
        try {
          piece = hybrid_astar(slice, seg.q1, seg.q2, model, opts.search, &map, deadline);
          break;
        } catch (const PlanningError& e) {
          if (e.kind() != ErrorKind::SliceExhausted) throw;
          if (d >= diag) throw PlanningError(ErrorKind::SliceExhausted, e.what(), "kino", k);
        }
      }
      for (const Vec2& p : piece) {
        next.push_back(p);
        next_flag.push_back(1);
      }
      while (i < cur.size() && cum[i] <= seg.arc_end + 1e-9) ++i;
      if (i < cur.size() && i + 1 < cur.size() && distance(cur[i], seg.q2.pos()) < 0.25) ++i;
      ++rep.segments_repaired;
    }
    while (i < cur.size()) {
      next.push_back(cur[i]);
      next_flag.push_back(flag[i]);
      ++i;
    }
    cur = std::move(next);
    flag = std::move(next_flag);
  }

  for (size_t i = 0; i < flag.size();) {
    if (!flag[i]) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < flag.size() && flag[j + 1]) ++j;
    rep.replanned.push_back({i, j});
    i = j + 1;
  }
  rep.path = std::move(cur);
  return rep;
}

}  // namespace offroad
