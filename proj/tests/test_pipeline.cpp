#include "doctest.h"
#include "support.hpp"

#include "offroad/metrics.hpp"
#include "offroad/pipeline.hpp"
#include "offroad/synth.hpp"

using namespace offroad;

namespace {

// About 1 m per pixel near the equator.
GeoTransform metric_transform() {
  GeoTransform t;
  t.x_origin = 10.0;
  t.y_origin = 0.001;
  t.pixel_width = 1.0 / 111320.0;
  t.pixel_height = -1.0 / 110574.0;
  return t;
}

PlanEndpoint at(const IntermediateMap& m, Vec2 p) {
  const GeoPoint g = pixel_to_geo(p.x, p.y, m.transform());
  return {g.lon, g.lat, std::nullopt};
}

PlanRequest request(const IntermediateMap& m, Vec2 s, Vec2 t, PlanMode mode = PlanMode::TrailPreferred) {
  PlanRequest r;
  r.start = at(m, s);
  r.target = at(m, t);
  r.mode = mode;
  return r;
}

void fill_rect(IntermediateMap& m, int x0, int y0, int x1, int y1, CellClass c) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m.set(x, y, c);
}

void check_invariants(const PlanResult& r, const IntermediateMap& m) {
  REQUIRE(r.path.size() >= 2);
  for (size_t i = 1; i < r.path.size(); ++i) CHECK(distance(r.path[i - 1], r.path[i]) <= 2 * std::sqrt(2.0) + 1e-9);
  for (const Vec2& p : r.path) CHECK(m.is_traversable(cell_of(p)));
  CHECK(r.metrics.max_curvature <= r.k_max * 1.05 + 1e-9);
  CHECK(oracle::max_circumcurvature(r.path) / r.meters_per_pixel <= r.k_max * 1.05 + 1e-9);
  // Segments tile the path.
  PixelPath joined;
  for (const auto& s : r.segments)
    for (const Vec2& p : s.pixels)
      if (joined.empty() || !(joined.back() == p)) joined.push_back(p);
  CHECK(joined == r.path);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("start and target on one straight trail stay on it") {
  IntermediateMap m(240, 80, metric_transform());
  fill_rect(m, 10, 39, 229, 41, CellClass::Trail);
  const TrailNetwork net = TrailNetwork::build(m, 4.0);
  const auto r = plan(request(m, {20, 40}, {220, 40}), m, net);
  REQUIRE(r.segments.size() == 1);
  CHECK(r.segments[0].kind == SegmentKind::Trail);
  CHECK_FALSE(r.fell_back_to_direct);
  for (const Vec2& p : r.path) CHECK(m.at(cell_of(p)) == CellClass::Trail);
  CHECK(r.metrics.length_m == doctest::Approx(200.0).epsilon(0.02));
  check_invariants(r, m);
}

TEST_CASE("off-trail endpoints give start, trail and end segments") {
  // U-shaped trail with its two arms pointing down; start and target sit
  // below each arm.
  IntermediateMap m(300, 300, metric_transform());
  fill_rect(m, 60, 60, 62, 200, CellClass::Trail);
  fill_rect(m, 60, 60, 240, 62, CellClass::Trail);
  fill_rect(m, 238, 60, 240, 200, CellClass::Trail);
  fill_rect(m, 120, 120, 180, 290, CellClass::Obstacle);
  const TrailNetwork net = TrailNetwork::build(m, 4.0);
  const auto r = plan(request(m, {61, 260}, {239, 260}), m, net);
  REQUIRE(r.segments.size() == 3);
  CHECK(r.segments[0].kind == SegmentKind::OffroadStart);
  CHECK(r.segments[1].kind == SegmentKind::Trail);
  CHECK(r.segments[2].kind == SegmentKind::OffroadEnd);
  REQUIRE(r.s_bar);
  REQUIRE(r.t_bar);
  // Joints lie on the trail, on the arm next to each endpoint.
  CHECK(m.at(cell_of({r.s_bar->x, r.s_bar->y})) == CellClass::Trail);
  CHECK(m.at(cell_of({r.t_bar->x, r.t_bar->y})) == CellClass::Trail);
  CHECK(r.s_bar->x < 100);
  CHECK(r.t_bar->x > 200);
  CHECK(r.segments[0].pixels.back() == r.segments[1].pixels.front());
  CHECK(r.segments[1].pixels.back() == r.segments[2].pixels.front());
  for (const Vec2& p : r.segments[1].pixels) CHECK(traversable(m.at(cell_of(p))));
  check_invariants(r, m);
}

TEST_CASE("no trails falls back to a direct plan") {
  IntermediateMap m(100, 100, metric_transform());
  fill_rect(m, 40, 0, 45, 70, CellClass::Obstacle);
  const auto r = plan(request(m, {10, 10}, {90, 10}), m, TrailNetwork::build(m, 4.0));
  CHECK(r.fell_back_to_direct);
  REQUIRE(r.segments.size() == 1);
  CHECK(r.segments[0].kind == SegmentKind::Direct);
  check_invariants(r, m);
}

TEST_CASE("restricted polygon is avoided and removing it restores the plan") {
  IntermediateMap m(200, 120, metric_transform());
  m.set(0, 0, CellClass::Obstacle);
  PlanningContext ctx(m, 4.0);
  PlanRequest req = request(m, {20, 60}, {180, 60}, PlanMode::Direct);
  const auto before = ctx.plan(req);
  const std::vector<Vec2> poly{{80, 30}, {120, 30}, {120, 90}, {80, 90}};
  const auto during = replan_with_overlays(ctx, req, {{poly, OverlayKind::Restricted}});
  for (const Vec2& p : during.path) CHECK(oracle::angle_winding(cell_of(p).center(), poly) == 0);
  CHECK(during.metrics.length_m > before.metrics.length_m);
  const auto after = replan_with_overlays(ctx, req, {});
  CHECK(after.path == before.path);
  CHECK(after.geo.size() == before.geo.size());
  check_invariants(during, apply_overlays(m, std::vector<AreaOverlay>{{poly, OverlayKind::Restricted}}));
}

TEST_CASE("passable overlay opens a shorter crossing") {
  IntermediateMap m(200, 200, metric_transform());
  fill_rect(m, 0, 95, 199, 105, CellClass::Water);
  fill_rect(m, 185, 95, 199, 105, CellClass::Free);  // far ford
  PlanRequest req = request(m, {30, 40}, {30, 160}, PlanMode::Direct);
  const auto net = TrailNetwork::build(m, 4.0);
  const auto base = plan(req, m, net);
  req.overlays = {{{{15, 90}, {45, 90}, {45, 110}, {15, 110}}, OverlayKind::Passable}};
  const auto bridged = plan(req, m, net);
  CHECK(bridged.metrics.length_m < 0.5 * base.metrics.length_m);
  check_invariants(bridged, apply_overlays(m, req.overlays));
}

TEST_CASE("restricted target has no grid path") {
  IntermediateMap m(100, 100, metric_transform());
  PlanRequest req = request(m, {10, 10}, {80, 80}, PlanMode::Direct);
  req.overlays = {{{{70, 70}, {90, 70}, {90, 90}, {70, 90}}, OverlayKind::Restricted}};
  try {
    plan(req, m, TrailNetwork::build(m, 4.0));
    FAIL("expected an error");
  } catch (const PlanningError& e) {
    CHECK(e.kind() == ErrorKind::NoGridPath);
  }
}

TEST_CASE("request validation") {
  IntermediateMap m(50, 50, metric_transform());
  const auto net = TrailNetwork::build(m, 4.0);
  auto kind_of = [&](PlanRequest r) {
    try {
      plan(r, m, net);
    } catch (const PlanningError& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind_of(request(m, {10, 10}, {10, 10})) == ErrorKind::InvalidArgument);
  CHECK(kind_of(request(m, {10, 10}, {500, 10})) == ErrorKind::InvalidArgument);
  PlanRequest nan = request(m, {10, 10}, {20, 10});
  nan.start.lon = std::nan("");
  CHECK(kind_of(nan) == ErrorKind::InvalidArgument);
}

TEST_CASE("synthetic scene plans satisfy the path invariants and are deterministic") {
  SynthOptions so;
  so.width = 500;
  so.height = 500;
  so.seed = 4;
  so.trail_count = 3;
  const IntermediateMap m = synth_map(so);
  PlanningContext ctx(m, 4.0);
  std::mt19937_64 rng(8);
  int done = 0;
  for (int k = 0; k < 200 && done < 6; ++k) {
    const Vec2 s{double(rng() % 500), double(rng() % 500)}, t{double(rng() % 500), double(rng() % 500)};
    if (distance(s, t) < 200) continue;
    const PlanRequest req = request(m, s, t, k % 2 ? PlanMode::Direct : PlanMode::TrailPreferred);
    PlanResult a;
    try {
      a = ctx.plan(req);
    } catch (const PlanningError& e) {
      CHECK(e.kind() == ErrorKind::NoGridPath);
      continue;
    }
    check_invariants(a, m);
    CHECK(a.path.front() == cell_of(s).center());
    CHECK(a.path.back() == cell_of(t).center());
    const auto b = ctx.plan(req);
    CHECK(a.path == b.path);
    ++done;
  }
  CHECK(done == 6);
}

}  // TEST_SUITE
