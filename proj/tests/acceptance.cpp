// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "support.hpp"

#include "offroad/bench.hpp"
#include "offroad/kernels.hpp"
#include "offroad/kino.hpp"
#include "offroad/metrics.hpp"
#include "offroad/pipeline.hpp"
#include "offroad/smooth.hpp"
#include "offroad/synth.hpp"
#include "offroad/trails.hpp"

using namespace offroad;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

IntermediateMap bernoulli_map(int w, int h, double p, CellClass on, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(p);
  IntermediateMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (b(rng)) m.set(x, y, on);
  return m;
}

IntermediateMap blob_map(int w, int h, int blobs, uint64_t seed) {
  std::mt19937_64 rng(seed);
  IntermediateMap m(w, h);
  for (int b = 0; b < blobs; ++b) {
    const int cx = int(rng() % w), cy = int(rng() % h), r = 2 + int(rng() % 6);
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x)
        if (m.in_bounds(x, y) && (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y, CellClass::Obstacle);
  }
  return m;
}

// ---------------------------------------------------------------------------

Outcome geo_round_trip() {
  const GeoTransform t{30.0, 56.0, 1.6e-5, -9e-6};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lon(30.0, 30.256), lat(55.955, 56.0);
  const auto t0 = Clock::now();
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = lon(rng), b = lat(rng);
    const Vec2 p = geo_to_pixel(a, b, t);
    const GeoPoint g = pixel_to_geo(p.x, p.y, t);
    worst = std::max({worst, std::abs(g.lon - a), std::abs(g.lat - b)});
  }
  const double took = seconds_since(t0);
  return {worst < 1e-9 && took < 1.0, fmt("max error %.3g deg over 1e4 points in %.4f s", worst, took)};
}

Outcome grid_optimality() {
  std::mt19937_64 rng(2024);
  int solved = 0, bad = 0;
  double worst = 0;
  for (int attempts = 0; solved < 200 && attempts < 4000; ++attempts) {
    const auto m = bernoulli_map(64, 64, 0.1 + 0.25 * double(rng() % 100) / 100.0, CellClass::Obstacle, rng());
    const Cell s{int(rng() % 64), int(rng() % 64)}, t{int(rng() % 64), int(rng() % 64)};
    if (!m.is_traversable(s) || !m.is_traversable(t)) continue;
    const auto d = oracle::dijkstra(64, 64, s.x, s.y, [&](int x, int y) { return m.is_traversable(x, y); });
    const double want = d[static_cast<size_t>(t.y) * 64 + t.x];
    if (std::isinf(want)) continue;
    const ClearanceMap grid(m);
    try {
      const double ea = std::abs(astar(grid, s, t).cost - want), ej = std::abs(jps(grid, s, t).cost - want);
      worst = std::max({worst, ea, ej});
      bad += ea > 1e-9 || ej > 1e-9;
    } catch (const PlanningError&) {
      ++bad;
    }
    ++solved;
  }
  return {solved == 200 && bad == 0, fmt("%d solvable maps, %d mismatches, max |cost - dijkstra| %.3g", solved, bad, worst)};
}

Outcome trail_oracle() {
  int checked = 0, bad = 0;
  size_t largest = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const int w = 30, h = 28;
    const auto m = bernoulli_map(w, h, 0.5, CellClass::Trail, 900 + seed);
    auto is_trail = [&](int x, int y) { return m.in_bounds(x, y) && m.at(x, y) == CellClass::Trail; };
    std::vector<Cell> nodes;
    std::vector<long> id(static_cast<size_t>(w) * h, -1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (is_trail(x, y)) {
          id[static_cast<size_t>(y) * w + x] = long(nodes.size());
          nodes.push_back({x, y});
        }
    if (nodes.size() > 500) return {false, "fixture exceeds 500 nodes"};
    largest = std::max(largest, nodes.size());
    std::vector<std::tuple<size_t, size_t, double>> edges;
    for (size_t i = 0; i < nodes.size(); ++i)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy) && is_trail(nodes[i].x + dx, nodes[i].y + dy))
            edges.push_back({i, size_t(id[static_cast<size_t>(nodes[i].y + dy) * w + nodes[i].x + dx]),
                             std::hypot(double(dx), double(dy))});
    const auto apsp = oracle::floyd_warshall(nodes.size(), edges);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 20; ++k) {
      const size_t a = rng() % nodes.size(), b = rng() % nodes.size();
      const auto f = wavefront_distance(m, nodes[a], 0);
      ++checked;
      try {
        const auto p = dijkstra_trail_path(m, f, nodes[b], 0);
        bad += !(std::abs(p.length - apsp[a][b]) < 1e-9);
      } catch (const PlanningError& e) {
        bad += !(std::isinf(apsp[a][b]) && e.kind() == ErrorKind::NoTrailPath);
      }
    }
  }
  return {bad == 0, fmt("%d queries on trail graphs up to %zu nodes, %d mismatches vs Floyd-Warshall", checked, largest, bad)};
}

Outcome kinematics() {
  const double l = 2.5, phi = 0.5, rho = l / std::tan(phi);
  Pose q{0, 0, 0};
  const double dt = 1e-3;
  const int steps = int(std::round(2 * kPi * rho / dt));
  double worst = 0;
  for (int i = 0; i < steps; ++i) {
    q = bicycle_rk4_step(q, 1.0, phi, l, dt);
    worst = std::max(worst, std::abs(std::hypot(q.x, q.y - rho) - rho) / rho);
  }
  const double s = corner_center_distance(kPi / 2, 1.0);
  const double model_rho = min_turning_radius(KinematicModel(l, phi));
  const bool ok = worst < 0.01 && std::abs(s - 1.41401) < 1e-4 && std::abs(model_rho - rho) < 1e-12;
  return {ok, fmt("RK4 radius deviation %.3g%%, rho_min %.4f m, s(pi/2, 1) = %.5f", 100 * worst, model_rho, s)};
}

PixelPath random_cornered_path(std::mt19937_64& rng, int size) {
  std::uniform_real_distribution<double> u(0.25 * size, 0.75 * size), turn(0.6 * kPi, 0.95 * kPi), len(25, 60);
  std::vector<Vec2> pts{{u(rng), u(rng)}};
  double h = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
  const int corners = 2 + int(rng() % 3);
  for (int i = 0; i <= corners; ++i) {
    Vec2 next;
    for (int tries = 0; tries < 50; ++tries) {
      const double hh = i == 0 ? h : h + (rng() % 2 ? 1 : -1) * turn(rng);
      next = pts.back() + Vec2{std::cos(hh), std::sin(hh)} * len(rng);
      if (next.x > 0.1 * size && next.y > 0.1 * size && next.x < 0.9 * size && next.y < 0.9 * size) {
        h = hh;
        break;
      }
    }
    pts.push_back({std::round(next.x), std::round(next.y)});
  }
  PixelPath out{pts.front()};
  for (size_t i = 1; i < pts.size(); ++i) {
    const int n = std::max(1, int(std::ceil(distance(pts[i - 1], pts[i]))));
    for (int k = 1; k <= n; ++k) out.push_back(pts[i - 1] + (pts[i] - pts[i - 1]) * (double(k) / n));
  }
  return out;
}

Outcome repair() {
  std::mt19937_64 rng(77);
  const int size = 400;
  const ClearanceMap cm(IntermediateMap(size, size));
  const KinematicModel model(2.5, 0.5, 1.0);
  const double limit = model.k_max_px() * 1.05;
  int over = 0, not_idem = 0, errors = 0;
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const PixelPath p = random_cornered_path(rng, size);
    try {
      const auto r = repair_path(p, cm, model);
      const double kmax = oracle::max_circumcurvature(r.path);
      worst = std::max(worst, kmax);
      over += kmax > limit;
      not_idem += !(repair_path(r.path, cm, model).path == r.path);
    } catch (const PlanningError&) {
      ++errors;
    }
  }
  return {over == 0 && not_idem == 0 && errors == 0,
          fmt("50 paths: max curvature %.4f (limit %.4f), %d over, %d not idempotent, %d errors", worst, limit, over,
              not_idem, errors)};
}

Outcome smoothing() {
  const auto m = blob_map(140, 140, 35, 6);
  const auto f = build_voronoi_field(m);
  SmoothingParams sp;
  std::mt19937_64 rng(20);
  // Gradient check on random paths kept away from cell borders and hinge kinks.
  double worst = 0;
  int paths = 0;
  while (paths < 20) {
    std::uniform_real_distribution<double> ux(10, 130), step(1.0, 3.0), turn(-1.2, 1.2);
    PixelPath p{{ux(rng), ux(rng)}};
    double hd = 3 * turn(rng);
    const int n = 5 + int(rng() % 25);
    bool ok = true;
    for (int i = 1; i < n; ++i) {
      hd += turn(rng);
      p.push_back(p.back() + Vec2{std::cos(hd), std::sin(hd)} * step(rng));
      ok &= p.back().x > 3 && p.back().y > 3 && p.back().x < 136 && p.back().y < 136;
    }
    for (const Vec2& q : p) ok &= std::abs(q.x - std::round(q.x)) > 1e-3 && std::abs(q.y - std::round(q.y)) > 1e-3;
    if (ok)
      for (double k : curvature_profile(p)) ok &= std::abs(std::abs(k) - sp.k_max_px()) > 1e-3;
    if (!ok) continue;
    ++paths;
    std::vector<Vec2> g;
    cost_gradient(p, f, sp, g);
    std::vector<Vec2> fd(p.size());
    double scale = 0;
    const double h = 1e-5;
    for (size_t i = 0; i < p.size(); ++i)
      for (int axis = 0; axis < 2; ++axis) {
        PixelPath a = p, b = p;
        (axis ? a[i].y : a[i].x) += h;
        (axis ? b[i].y : b[i].x) -= h;
        const double d = (cost_terms(a, f, sp).J - cost_terms(b, f, sp).J) / (2 * h);
        (axis ? fd[i].y : fd[i].x) = d;
        scale = std::max(scale, std::abs(d));
      }
    for (size_t i = 0; i < p.size(); ++i)
      worst = std::max(worst, (g[i] - fd[i]).norm() / std::max(fd[i].norm(), 1e-3 * scale));
  }

  // Monotone history and frozen vertices on grid paths.
  const ClearanceMap cm(m);
  const KinematicModel model(2.5, 0.5);
  sp.k_max = model.k_max();
  int runs = 0, increases = 0, moved_frozen = 0;
  for (int k = 0; k < 400 && runs < 20; ++k) {
    const Cell s{int(rng() % 140), int(rng() % 140)}, t{int(rng() % 140), int(rng() % 140)};
    if (!cm.passable(s) || !cm.passable(t) || distance(s.center(), t.center()) < 50) continue;
    PixelPath p;
    try {
      p = astar(cm, s, t).points;
    } catch (const PlanningError&) {
      continue;
    }
    std::vector<uint8_t> frozen(p.size(), 0);
    for (size_t i = 0; i < p.size(); i += 5) frozen[i] = 1;
    const auto r = smooth_path(p, cm, f, sp, frozen);
    for (size_t i = 1; i < r.history.size(); ++i) increases += r.history[i] > r.history[i - 1];
    std::vector<long> origin;
    const auto d = densify(p, sp.max_spacing, &origin);
    for (size_t i = 0; i < d.size(); ++i)
      if (origin[i] >= 0 && frozen[origin[i]]) moved_frozen += !(r.path[i].x == d[i].x && r.path[i].y == d[i].y);
    ++runs;
  }
  const bool ok = worst < 1e-4 && runs == 20 && increases == 0 && moved_frozen == 0;
  return {ok, fmt("gradient max rel. error %.3g on 20 paths; %d runs, %d J increases, %d frozen vertices moved", worst,
                  runs, increases, moved_frozen)};
}

Outcome voronoi_identities() {
  const int w = 200, h = 200;
  std::mt19937_64 rng(5);
  std::bernoulli_distribution b(0.01);
  // Scattered obstacles and walls on the left, open ground on the right.
  std::vector<uint8_t> obst(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < 90; ++x) obst[static_cast<size_t>(y) * w + x] = b(rng);
  for (int x = 0; x < 90; ++x) obst[x] = obst[static_cast<size_t>(h - 1) * w + x] = 1;
  for (int y = 40; y < 160; ++y) obst[static_cast<size_t>(y) * w + 70] = 1;
  const double alpha = 10.0, d_o_max = 30.0;
  const auto f = kernels::par::voronoi_field(w, h, obst, alpha, d_o_max);
  size_t violations = 0, at_obstacle = 0, on_edge = 0, far = 0;
  for (size_t i = 0; i < f.v.size(); ++i) {
    const double v = f.v[i];
    violations += !(v >= 0.0 && v <= 1.0);
    if (f.d_o[i] == 0.0) violations += v != 1.0, ++at_obstacle;
    if (f.d_v[i] == 0.0) violations += v != 0.0, ++on_edge;
    if (f.d_o[i] >= d_o_max) violations += v != 0.0, ++far;
    violations += std::abs(v - oracle::field_value(f.d_o[i], f.d_v[i], alpha, d_o_max)) > 1e-12;
  }
  const bool ok = violations == 0 && at_obstacle && on_edge && far;
  return {ok, fmt("40000 cells (%zu obstacle, %zu edge, %zu beyond d_o_max), %zu violations", at_obstacle, on_edge, far,
                  violations)};
}

Outcome quality_trend() {
  BenchScenario sc;
  SynthOptions so;
  so.width = 2000;
  so.height = 2000;
  so.seed = 11;
  sc.maps.push_back({"synth2000", {}, {}, so});
  sc.pairs = 30;
  sc.min_displacement_m = 800;
  sc.methods = {BenchMethod::Jps, BenchMethod::Proposed};
  sc.without_road_network = false;
  sc.timeout_s = 60;
  const auto rep = run_benchmark(sc);
  const BenchSummary* jps = nullptr;
  const BenchSummary* prop = nullptr;
  for (const auto& s : rep.summary) (s.method == BenchMethod::Jps ? jps : prop) = &s;
  if (!jps || !prop) return {false, "benchmark produced no summary"};
  const bool ok = prop->successes >= 30 && jps->successes >= 30 && prop->mean_csd < jps->mean_csd &&
                  prop->mean_mod >= jps->mean_mod;
  return {ok, fmt("%zu pairs: CSD %.4f vs %.4f 1/m, MOD %.3f vs %.3f m (PROPOSED vs JPS)", prop->runs, prop->mean_csd,
                  jps->mean_csd, prop->mean_mod, jps->mean_mod)};
}

Outcome performance() {
  SynthOptions so;
  so.width = 5000;
  so.height = 16000;
  so.meters_per_pixel = 0.5;
  so.seed = 21;
  PlanningContext ctx(synth_map(so));
  const auto pairs = generate_pairs(ctx.base_map(), 9, 1000.0 / 0.5, 3, 1.0 / 0.5);
  std::vector<double> times;
  long peak = 0;
  int failed = 0;
  for (const auto& p : pairs) {
    const PlanRequest req = bench_request(BenchMethod::Proposed, true, ctx.base_map(), p, 2.0, 60.0);
    const auto t0 = Clock::now();
    try {
      const PlanResult r = ctx.plan(req);
      times.push_back(seconds_since(t0));
      peak = std::max(peak, r.metrics.peak_memory_bytes);
    } catch (const PlanningError&) {
      ++failed;
    }
  }
  if (times.empty()) return {false, "no plan succeeded"};
  std::sort(times.begin(), times.end());
  const double median = times[times.size() / 2];
  const bool ok = failed == 0 && median <= 5.0 && peak <= 2'000'000'000L;
  return {ok, fmt("5000x16000 map, %zu plans: median %.2f s, max %.2f s, peak RSS %.2f GB, %d failed (%d threads)",
                  times.size(), median, times.back(), peak / 1e9, failed, kernels::max_threads())};
}

Outcome restricted_polygon() {
  SynthOptions so;
  so.width = 600;
  so.height = 600;
  so.seed = 31;
  const IntermediateMap base = synth_map(so);
  PlanningContext ctx(base, 4.0);
  const auto pairs = generate_pairs(base, 1, 400, 9, 1.0);
  PlanRequest req = bench_request(BenchMethod::Proposed, false, base, pairs[0], 2.0, 60.0);
  const PlanResult before = ctx.plan(req);
  // Square across the middle of the planned path.
  const Vec2 c = before.path[before.path.size() / 2];
  const std::vector<Vec2> poly{{c.x - 15, c.y - 15}, {c.x + 15, c.y - 15}, {c.x + 15, c.y + 15}, {c.x - 15, c.y + 15}};
  size_t hits_before = 0;
  for (const Vec2& p : before.path) hits_before += oracle::angle_winding(cell_of(p).center(), poly) != 0;
  const PlanResult during = replan_with_overlays(ctx, req, {{poly, OverlayKind::Restricted}});
  size_t inside = 0;
  for (const Vec2& p : during.path) inside += oracle::angle_winding(cell_of(p).center(), poly) != 0;
  const PlanResult after = replan_with_overlays(ctx, req, {});
  bool same = after.path == before.path && after.geo.size() == before.geo.size();
  for (size_t i = 0; same && i < after.geo.size(); ++i)
    same = after.geo[i].lon == before.geo[i].lon && after.geo[i].lat == before.geo[i].lat;
  const bool ok = hits_before > 0 && inside == 0 && same;
  return {ok, fmt("original path had %zu points in the polygon, replanned has %zu; restored bit-exact: %s", hits_before,
                  inside, same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"geo round trip", geo_round_trip},
      {"grid planner optimality", grid_optimality},
      {"trail path oracle", trail_oracle},
      {"kinematics", kinematics},
      {"kinematic repair", repair},
      {"smoothing", smoothing},
      {"voronoi field identities", voronoi_identities},
      {"quality trend", quality_trend},
      {"performance envelope", performance},
      {"restricted polygon", restricted_polygon},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %-26s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
