#include "offroad/geomap.hpp"

#include <algorithm>
#include <limits>

#include "offroad/kernels.hpp"

namespace offroad {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnsupportedGeometry: return "UnsupportedGeometry";
    case ErrorKind::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorKind::NoTrailNearStart: return "NoTrailNearStart";
    case ErrorKind::NoTrailPath: return "NoTrailPath";
    case ErrorKind::NoGridPath: return "NoGridPath";
    case ErrorKind::SliceExhausted: return "SliceExhausted";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

const char* to_string(CellClass c) {
  switch (c) {
    case CellClass::Free: return "free";
    case CellClass::Obstacle: return "obstacle";
    case CellClass::Trail: return "trail";
    case CellClass::Water: return "water";
    case CellClass::Restricted: return "restricted";
    case CellClass::PassableOverride: return "passable";
  }
  return "unknown";
}

void GeoTransform::validate() const {
  if (!valid())
    throw PlanningError(ErrorKind::InvalidArgument, "geotransform pixel size must be non-zero");
}

double GeoTransform::meters_per_pixel(double latitude) const {
  constexpr double kMetersPerDegLat = 110574.0;
  constexpr double kMetersPerDegLonEquator = 111320.0;
  const double mx = std::abs(pixel_width) * kMetersPerDegLonEquator *
                    std::cos(latitude * std::numbers::pi / 180.0);
  const double my = std::abs(pixel_height) * kMetersPerDegLat;
  return 0.5 * (mx + my);
}

Vec2 geo_to_pixel(double lon, double lat, const GeoTransform& t) {
  return {(lon - t.x_origin) / t.pixel_width, (lat - t.y_origin) / t.pixel_height};
}

GeoPoint pixel_to_geo(double x_pix, double y_pix, const GeoTransform& t) {
  return {t.x_origin + x_pix * t.pixel_width, t.y_origin + y_pix * t.pixel_height};
}

// ---------------------------------------------------------------------------

IntermediateMap::IntermediateMap(int width, int height, GeoTransform transform, CellClass fill)
    : width_(width), height_(height), transform_(std::move(transform)) {
  if (width < 0 || height < 0)
    throw PlanningError(ErrorKind::InvalidArgument, "map dimensions must be non-negative");
  cells_ = std::make_shared<std::vector<CellClass>>(size(), fill);
}

IntermediateMap::IntermediateMap(int width, int height, std::vector<CellClass> cells,
                                 GeoTransform transform)
    : width_(width), height_(height), transform_(std::move(transform)) {
  if (width < 0 || height < 0 || cells.size() != static_cast<size_t>(width) * height)
    throw PlanningError(ErrorKind::InvalidArgument, "cell array length must equal width * height");
  cells_ = std::make_shared<std::vector<CellClass>>(std::move(cells));
}

std::span<CellClass> IntermediateMap::mutable_cells() {
  if (cells_.use_count() > 1) cells_ = std::make_shared<std::vector<CellClass>>(*cells_);
  return *cells_;
}

double IntermediateMap::meters_per_pixel() const {
  const double mid_lat = transform_.y_origin + 0.5 * height_ * transform_.pixel_height;
  return transform_.meters_per_pixel(mid_lat);
}

bool IntermediateMap::operator==(const IntermediateMap& o) const {
  return width_ == o.width_ && height_ == o.height_ && transform_ == o.transform_ &&
         (cells_ == o.cells_ || *cells_ == *o.cells_);
}

// ---------------------------------------------------------------------------

double polygon_area(std::span<const Vec2> polygon) {
  double a = 0.0;
  for (size_t i = 0, n = polygon.size(); i < n; ++i) a += polygon[i].cross(polygon[(i + 1) % n]);
  return 0.5 * a;
}

int winding_number(Vec2 p, std::span<const Vec2> polygon) {
  int wn = 0;
  const size_t n = polygon.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[(i + 1) % n];
    const double side = (b - a).cross(p - a);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0) ++wn;
    } else {
      if (b.y <= p.y && side < 0) --wn;
    }
  }
  return wn;
}

namespace {

void require_polygon(std::span<const Vec2> polygon) {
  if (polygon.size() < 3)
    throw PlanningError(ErrorKind::DegeneratePolygon, "polygon needs at least 3 vertices");
  if (std::abs(polygon_area(polygon)) <= 1e-12)
    throw PlanningError(ErrorKind::DegeneratePolygon, "polygon has zero area");
}

// Distance from an axis-aligned unit cell square centred at c to segment ab.
double segment_cell_distance(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 lo{c.x - 0.5, c.y - 0.5};
  const Vec2 hi{c.x + 0.5, c.y + 0.5};
  auto point_box = [&](Vec2 p) {
    const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
    const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
    return std::hypot(dx, dy);
  };
  auto point_segment = [&](Vec2 p) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + ab * t);
  };
  // Segment crosses the box (Liang-Barsky clip).
  {
    double t0 = 0.0, t1 = 1.0;
    const Vec2 d = b - a;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {a.x - lo.x, hi.x - a.x, a.y - lo.y, hi.y - a.y};
    bool inside = true;
    for (int i = 0; i < 4 && inside; ++i) {
      if (p[i] == 0.0) {
        if (q[i] < 0) inside = false;
      } else {
        const double r = q[i] / p[i];
        if (p[i] < 0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
        if (t0 > t1) inside = false;
      }
    }
    if (inside) return 0.0;
  }
  double best = std::min(point_box(a), point_box(b));
  const Vec2 corners[4] = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
  for (const Vec2& k : corners) best = std::min(best, point_segment(k));
  return best;
}

void burn_polyline(IntermediateMap& map, std::span<const Vec2> line, double width, CellClass value) {
  const double half = 0.5 * width;
  auto cells = map.mutable_cells();
  for (size_t i = 0; i + 1 < line.size() || (line.size() == 1 && i == 0); ++i) {
    const Vec2 a = line[i];
    const Vec2 b = line.size() == 1 ? line[0] : line[i + 1];
    const int x0 = std::max(0, int(std::floor(std::min(a.x, b.x) - half - 1)));
    const int x1 = std::min(map.width() - 1, int(std::ceil(std::max(a.x, b.x) + half + 1)));
    const int y0 = std::max(0, int(std::floor(std::min(a.y, b.y) - half - 1)));
    const int y1 = std::min(map.height() - 1, int(std::ceil(std::max(a.y, b.y) + half + 1)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (segment_cell_distance(a, b, {double(x), double(y)}) < half)
          cells[map.index(x, y)] = value;
    if (line.size() == 1) break;
  }
}

}  // namespace

IntermediateMap rasterize_features(const IntermediateMap& map, std::span<const GeoFeature> features,
                                   const RasterizeOptions& opts) {
  IntermediateMap out = map;
  for (size_t fi = 0; fi < features.size(); ++fi) {
    const GeoFeature& f = features[fi];
    std::vector<std::vector<Vec2>> parts = f.parts;
    if (opts.geographic)
      for (auto& part : parts)
        for (Vec2& p : part) p = geo_to_pixel(p.x, p.y, map.transform());
    switch (f.kind) {
      case GeometryKind::Polygon: {
        if (parts.empty() || parts[0].size() < 3)
          throw PlanningError(ErrorKind::UnsupportedGeometry, "polygon feature without outer ring",
                              "rasterize", fi);
        if (parts.size() == 1) {
          kernels::par::fill_polygon(out.mutable_cells(), out.width(), out.height(), parts[0],
                                     f.cell_class);
          break;
        }
        // Outer ring with holes: inside the outer ring and outside every hole.
        double minx = parts[0][0].x, maxx = minx, miny = parts[0][0].y, maxy = miny;
        for (const Vec2& p : parts[0]) {
          minx = std::min(minx, p.x);
          maxx = std::max(maxx, p.x);
          miny = std::min(miny, p.y);
          maxy = std::max(maxy, p.y);
        }
        for (int y = std::max(0, int(std::ceil(miny))); y <= std::min(out.height() - 1, int(maxy)); ++y) {
          for (int x = std::max(0, int(std::ceil(minx))); x <= std::min(out.width() - 1, int(maxx)); ++x) {
            const Vec2 c{double(x), double(y)};
            if (winding_number(c, parts[0]) == 0) continue;
            bool in_hole = false;
            for (size_t h = 1; h < parts.size() && !in_hole; ++h)
              in_hole = parts[h].size() >= 3 && winding_number(c, parts[h]) != 0;
            if (!in_hole) out.set(x, y, f.cell_class);
          }
        }
        break;
      }
      case GeometryKind::LineString: {
        double width = f.width_px;
        if (width <= 0)
          width = f.cell_class == CellClass::Trail ? opts.trail_width_px : opts.line_width_px;
        for (const auto& part : parts) {
          if (part.empty()) continue;
          burn_polyline(out, part, width, f.cell_class);
        }
        break;
      }
      case GeometryKind::Point:
        throw PlanningError(ErrorKind::UnsupportedGeometry, "point features are not rasterized",
                            "rasterize", fi);
    }
  }
  return out;
}

IntermediateMap apply_area_overlay(const IntermediateMap& map, std::span<const Vec2> polygon,
                                   OverlayKind kind) {
  require_polygon(polygon);
  IntermediateMap out = map;
  kernels::par::fill_polygon(out.mutable_cells(), out.width(), out.height(), polygon,
                             kind == OverlayKind::Restricted ? CellClass::Obstacle
                                                             : CellClass::PassableOverride);
  return out;
}

IntermediateMap apply_overlays(const IntermediateMap& map, std::span<const AreaOverlay> overlays) {
  IntermediateMap out = map;
  for (const OverlayKind pass : {OverlayKind::Passable, OverlayKind::Restricted})
    for (const AreaOverlay& o : overlays)
      if (o.kind == pass) out = apply_area_overlay(out, o.polygon, o.kind);
  return out;
}

IntermediateMap downsample(const IntermediateMap& map, double df) {
  if (!(df >= 1.0))
    throw PlanningError(ErrorKind::InvalidArgument, "downsampling factor must be >= 1");
  const int out_w = static_cast<int>(std::floor(map.width() / df));
  const int out_h = static_cast<int>(std::floor(map.height() / df));
  if (out_w <= 0 || out_h <= 0)
    throw PlanningError(ErrorKind::InvalidArgument, "downsampling factor yields an empty map");
  GeoTransform t = map.transform();
  t.pixel_width *= df;
  t.pixel_height *= df;
  return IntermediateMap(out_w, out_h, kernels::par::downsample(map, df, out_w, out_h), t);
}

// ---------------------------------------------------------------------------

std::array<Vec2, 4> slice_corners(Vec2 s, Vec2 t, double dx, double dy) {
  const Vec2 d = t - s;
  const double len = d.norm();
  const Vec2 u = len > 0 ? d / len : Vec2{1.0, 0.0};
  const Vec2 v{-u.y, u.x};
  return {s + v * dy - u * dx, s - v * dy - u * dx, t - v * dy + u * dx, t + v * dy + u * dx};
}

namespace {

struct SliceFrame {
  Vec2 d1, d2, d3, d4;
  Vec2 origin, u, v;
  int nx = 0, ny = 0;
};

SliceFrame slice_frame(const IntermediateMap& map, Vec2 s, Vec2 t, double dx, double dy,
                       const SliceOptions& opts) {
  if (!(dx >= 0) || !(dy >= 0))
    throw PlanningError(ErrorKind::InvalidArgument, "slice offsets must be non-negative");
  SliceFrame f;
  double len_a, len_b;
  const double sep = distance(s, t);
  if (sep < opts.min_separation_px) {
    const double m = std::max(dx, dy);
    f.u = {1.0, 0.0};
    f.v = {0.0, 1.0};
    f.d1 = s + Vec2{-m, m};
    f.d2 = s + Vec2{-m, -m};
    f.d3 = s + Vec2{m, -m};
    f.d4 = s + Vec2{m, m};
    f.origin = f.d2;
    len_a = len_b = 2.0 * m;
  } else {
    const auto c = slice_corners(s, t, dx, dy);
    f.d1 = c[0];
    f.d2 = c[1];
    f.d3 = c[2];
    f.d4 = c[3];
    f.u = (t - s) / sep;
    f.v = {-f.u.y, f.u.x};
    f.origin = f.d2;
    len_a = sep + 2.0 * dx;
    len_b = 2.0 * dy;
  }
  // Clamp the rectangle to the extent of the parent map along both axes.
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  const Vec2 corners[4] = {{-0.5, -0.5},
                           {map.width() - 0.5, -0.5},
                           {-0.5, map.height() - 0.5},
                           {map.width() - 0.5, map.height() - 0.5}};
  for (const Vec2& c : corners) {
    const Vec2 d = c - f.origin;
    amin = std::min(amin, d.dot(f.u));
    amax = std::max(amax, d.dot(f.u));
    bmin = std::min(bmin, d.dot(f.v));
    bmax = std::max(bmax, d.dot(f.v));
  }
  const double a0 = std::max(0.0, std::floor(amin));
  const double a1 = std::min(len_a, std::ceil(amax));
  const double b0 = std::max(0.0, std::floor(bmin));
  const double b1 = std::min(len_b, std::ceil(bmax));
  if (a1 < a0 || b1 < b0) {
    f.nx = f.ny = 0;
    return f;
  }
  f.origin = f.origin + f.u * a0 + f.v * b0;
  f.nx = static_cast<int>(std::floor(a1 - a0)) + 1;
  f.ny = static_cast<int>(std::floor(b1 - b0)) + 1;
  return f;
}

}  // namespace

size_t slice_cell_count(const IntermediateMap& map, Vec2 s, Vec2 t, double dx, double dy,
                        const SliceOptions& opts) {
  const SliceFrame f = slice_frame(map, s, t, dx, dy, opts);
  return static_cast<size_t>(f.nx) * f.ny;
}

MapSlice slice_map(const IntermediateMap& map, Vec2 s, Vec2 t, double dx, double dy,
                   const SliceOptions& opts) {
  const SliceFrame f = slice_frame(map, s, t, dx, dy, opts);
  MapSlice slice;
  slice.d1 = f.d1;
  slice.d2 = f.d2;
  slice.d3 = f.d3;
  slice.d4 = f.d4;
  slice.origin = f.origin;
  slice.u = f.u;
  slice.v = f.v;
  std::vector<CellClass> cells(static_cast<size_t>(f.nx) * f.ny, CellClass::Obstacle);
  const bool axis_aligned = f.u.x == 1.0 && f.u.y == 0.0;
  // Corner probes of the slice cell footprint; any blocked probe blocks the cell.
  constexpr double kProbe = 0.45;
  const Vec2 probes[4] = {f.u * kProbe + f.v * kProbe, f.u * kProbe - f.v * kProbe,
                          f.u * -kProbe + f.v * kProbe, f.u * -kProbe - f.v * kProbe};
#pragma omp parallel for schedule(static)
  for (int j = 0; j < f.ny; ++j) {
    for (int i = 0; i < f.nx; ++i) {
      const Vec2 c = f.origin + f.u * double(i) + f.v * double(j);
      const Cell pc = cell_of(c);
      if (!map.in_bounds(pc)) continue;
      CellClass cls = map.at(pc);
      if (traversable(cls) && !axis_aligned) {
        for (const Vec2& pr : probes) {
          const Cell q = cell_of(c + pr);
          if (!map.is_traversable(q)) {
            cls = map.in_bounds(q) ? map.at(q) : CellClass::Obstacle;
            break;
          }
        }
      }
      cells[static_cast<size_t>(j) * f.nx + i] = cls;
    }
  }
  slice.submap = IntermediateMap(f.nx, f.ny, std::move(cells), GeoTransform{});
  return slice;
}

}  // namespace offroad
