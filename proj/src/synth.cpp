#include "offroad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace offroad {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

void fill_disk(IntermediateMap& m, Vec2 c, double r, CellClass cls) {
  auto cells = m.mutable_cells();
  const int x0 = std::max(0, int(std::floor(c.x - r))), x1 = std::min(m.width() - 1, int(std::ceil(c.x + r)));
  const int y0 = std::max(0, int(std::floor(c.y - r))), y1 = std::min(m.height() - 1, int(std::ceil(c.y + r)));
  const double r2 = r * r;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - c.x, dy = y - c.y;
      if (dx * dx + dy * dy <= r2) cells[m.index(x, y)] = cls;
    }
}

void fill_box(IntermediateMap& m, Vec2 c, double hw, double hh, double theta, CellClass cls) {
  auto cells = m.mutable_cells();
  const double ext = std::hypot(hw, hh);
  const int x0 = std::max(0, int(std::floor(c.x - ext))), x1 = std::min(m.width() - 1, int(std::ceil(c.x + ext)));
  const int y0 = std::max(0, int(std::floor(c.y - ext))), y1 = std::min(m.height() - 1, int(std::ceil(c.y + ext)));
  const double cs = std::cos(theta), sn = std::sin(theta);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - c.x, dy = y - c.y;
      if (std::abs(dx * cs + dy * sn) <= hw && std::abs(-dx * sn + dy * cs) <= hh) cells[m.index(x, y)] = cls;
    }
}

// Cells within `r` of segment ab.
void fill_capsule(IntermediateMap& m, Vec2 a, Vec2 b, double r, CellClass cls) {
  auto cells = m.mutable_cells();
  const int x0 = std::max(0, int(std::floor(std::min(a.x, b.x) - r)));
  const int x1 = std::min(m.width() - 1, int(std::ceil(std::max(a.x, b.x) + r)));
  const int y0 = std::max(0, int(std::floor(std::min(a.y, b.y) - r)));
  const int y1 = std::min(m.height() - 1, int(std::ceil(std::max(a.y, b.y) + r)));
  const Vec2 d = b - a;
  const double len2 = d.dot(d);
  const double r2 = r * r;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const Vec2 p{double(x), double(y)};
      const double t = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
      const Vec2 q = a + d * t - p;
      if (q.dot(q) <= r2) cells[m.index(x, y)] = cls;
    }
}

// Meandering polyline from `from`, wandering roughly along `theta` until it
// leaves the map or reaches `max_len`.
std::vector<Vec2> meander(Rng& rng, Vec2 from, double theta, double max_len, int w, int h, double step,
                          double wiggle) {
  std::vector<Vec2> pts{from};
  const double goal = theta;
  std::normal_distribution<double> turn(0.0, wiggle);
  Vec2 p = from;
  for (double len = 0; len < max_len; len += step) {
    theta += turn(rng) + 0.1 * wrap_angle(goal - theta);
    p = p + Vec2{std::cos(theta), std::sin(theta)} * step;
    pts.push_back(p);
    if (p.x < 0 || p.y < 0 || p.x >= w || p.y >= h) break;
  }
  return pts;
}

}  // namespace

IntermediateMap synth_map(const SynthOptions& o) {
  if (o.width < 16 || o.height < 16 || !(o.meters_per_pixel > 0))
    throw PlanningError(ErrorKind::InvalidArgument, "synthetic map too small");
  Rng rng(o.seed);
  const double w = o.width, h = o.height;

  GeoTransform t;
  t.x_origin = o.lon0;
  t.y_origin = o.lat0;
  t.pixel_height = -o.meters_per_pixel / 110574.0;
  const double mid_lat = o.lat0 + 0.5 * h * t.pixel_height;
  t.pixel_width = o.meters_per_pixel / (111320.0 * std::cos(mid_lat * std::numbers::pi / 180.0));
  IntermediateMap m(o.width, o.height, t);

  // Obstacles: round blobs (trees, rocks) and rotated boxes (buildings).
  const double area = w * h;
  double covered = 0.0;
  while (covered < o.obstacle_fraction * area) {
    const Vec2 c{uniform(rng, 0, w), uniform(rng, 0, h)};
    if (uniform(rng, 0, 1) < 0.6) {
      const double r = uniform(rng, 2.0, 14.0);
      fill_disk(m, c, r, CellClass::Obstacle);
      covered += std::numbers::pi * r * r;
    } else {
      const double hw = uniform(rng, 3.0, 15.0), hh = uniform(rng, 3.0, 10.0);
      fill_box(m, c, hw, hh, uniform(rng, 0, std::numbers::pi), CellClass::Obstacle);
      covered += 4 * hw * hh;
    }
  }

  // Rivers cross the short side, with fords every few hundred pixels.
  const bool tall = h > w;
  for (int r = 0; r < o.rivers; ++r) {
    Vec2 start;
    double theta;
    if (tall) {
      start = {-5.0, uniform(rng, 0.2 * h, 0.8 * h)};
      theta = uniform(rng, -0.3, 0.3);
    } else {
      start = {uniform(rng, 0.2 * w, 0.8 * w), -5.0};
      theta = std::numbers::pi / 2 + uniform(rng, -0.3, 0.3);
    }
    const auto pts = meander(rng, start, theta, 4.0 * (w + h), o.width, o.height, 8.0, 0.12);
    const double half = uniform(rng, 3.0, 5.0);
    double along = 0.0, next_ford = uniform(rng, 100, 300);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      along += distance(pts[i], pts[i + 1]);
      if (along > next_ford && along < next_ford + 40) continue;
      if (along >= next_ford + 40) next_ford = along + uniform(rng, 150, 400);
      fill_capsule(m, pts[i], pts[i + 1], half, CellClass::Water);
    }
  }

  if (!o.trails) return m;

  // Connected trail tree: a spine along the long axis, then branches that
  // leave an existing trail at a random point.
  const int count = o.trail_count > 0 ? o.trail_count : std::max(3, int(std::lround(area / 1.5e6)));
  std::vector<std::vector<Vec2>> trails;
  {
    const Vec2 s = tall ? Vec2{uniform(rng, 0.3 * w, 0.7 * w), 1.0} : Vec2{1.0, uniform(rng, 0.3 * h, 0.7 * h)};
    const double th = tall ? std::numbers::pi / 2 : 0.0;
    trails.push_back(meander(rng, s, th, 4.0 * (w + h), o.width, o.height, 10.0, 0.08));
  }
  while (static_cast<int>(trails.size()) < count) {
    const auto& host = trails[std::uniform_int_distribution<size_t>(0, trails.size() - 1)(rng)];
    if (host.size() < 4) continue;
    const size_t k = std::uniform_int_distribution<size_t>(1, host.size() - 2)(rng);
    const Vec2 d = host[k + 1] - host[k - 1];
    const double side = uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;
    const double th = std::atan2(d.y, d.x) + side * uniform(rng, 0.6, 1.4);
    trails.push_back(meander(rng, host[k], th, uniform(rng, 0.4, 1.0) * std::max(w, h), o.width, o.height, 10.0,
                             0.08));
  }
  for (const auto& tr : trails)
    for (size_t i = 0; i + 1 < tr.size(); ++i) fill_capsule(m, tr[i], tr[i + 1], o.trail_clearance_px, CellClass::Free);
  for (const auto& tr : trails)
    for (size_t i = 0; i + 1 < tr.size(); ++i)
      fill_capsule(m, tr[i], tr[i + 1], 0.5 * o.trail_width_px, CellClass::Trail);
  return m;
}

}  // namespace offroad
