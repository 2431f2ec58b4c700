#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "offroad/errors.hpp"
#include "offroad/geometry.hpp"

namespace offroad {

/// Axis-aligned raster georeference (EPSG:4326, no rotation terms).
struct GeoTransform {
  double x_origin = 0.0;      // longitude of pixel (0, 0)
  double y_origin = 0.0;      // latitude of pixel (0, 0)
  double pixel_width = 1.0;   // degrees per pixel along x, signed
  double pixel_height = -1.0; // degrees per pixel along y, signed
  std::string crs_id = "EPSG:4326";

  bool valid() const { return pixel_width != 0.0 && pixel_height != 0.0; }
  void validate() const;

  /// Ground resolution in meters per pixel, evaluated at `latitude`.
  double meters_per_pixel(double latitude) const;

  bool operator==(const GeoTransform&) const = default;
};

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

Vec2 geo_to_pixel(double lon, double lat, const GeoTransform& t);
GeoPoint pixel_to_geo(double x_pix, double y_pix, const GeoTransform& t);

enum class CellClass : std::uint8_t {
  Free = 0,
  Obstacle = 1,
  Trail = 2,
  Water = 3,
  Restricted = 4,
  PassableOverride = 5,
};

constexpr bool traversable(CellClass c) {
  return c == CellClass::Free || c == CellClass::Trail || c == CellClass::PassableOverride;
}

const char* to_string(CellClass c);

/// Flattened row-major traversability grid with its georeference.
///
/// Cell storage is shared between copies and cloned on the first mutation, so
/// overlay layers are cheap copies of a shared base map.
class IntermediateMap {
 public:
  IntermediateMap() = default;
  IntermediateMap(int width, int height, GeoTransform transform = {},
                  CellClass fill = CellClass::Free);
  IntermediateMap(int width, int height, std::vector<CellClass> cells, GeoTransform transform);

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return static_cast<size_t>(width_) * height_; }
  const GeoTransform& transform() const { return transform_; }
  void set_transform(const GeoTransform& t) { transform_ = t; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool in_bounds(Cell c) const { return in_bounds(c.x, c.y); }
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }
  Cell cell_at(size_t idx) const { return {int(idx % width_), int(idx / width_)}; }

  CellClass at(int x, int y) const { return (*cells_)[index(x, y)]; }
  CellClass at(Cell c) const { return at(c.x, c.y); }
  /// Out-of-bounds cells are not traversable.
  bool is_traversable(int x, int y) const { return in_bounds(x, y) && traversable(at(x, y)); }
  bool is_traversable(Cell c) const { return is_traversable(c.x, c.y); }

  void set(int x, int y, CellClass c) { mutable_cells()[index(x, y)] = c; }

  std::span<const CellClass> cells() const { return *cells_; }
  std::span<CellClass> mutable_cells();

  /// Ground resolution at the map's mid-latitude.
  double meters_per_pixel() const;

  bool shares_storage_with(const IntermediateMap& o) const { return cells_ == o.cells_; }
  bool operator==(const IntermediateMap& o) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::shared_ptr<std::vector<CellClass>> cells_ = std::make_shared<std::vector<CellClass>>();
  GeoTransform transform_;
};

// ---------------------------------------------------------------------------
// Features, overlays, downsampling

enum class GeometryKind { Polygon, LineString, Point };

/// One georeferenced (or already pixel-space) feature to burn into the map.
struct GeoFeature {
  GeometryKind kind = GeometryKind::Polygon;
  CellClass cell_class = CellClass::Obstacle;
  /// Polygon rings (first ring outer, later rings holes) or polyline parts.
  std::vector<std::vector<Vec2>> parts;
  /// Line width in pixels; 0 selects the configured default.
  double width_px = 0.0;
};

struct RasterizeOptions {
  double trail_width_px = 3.0;
  double line_width_px = 3.0;
  /// Feature coordinates are lon/lat and are projected with the map transform.
  bool geographic = false;
};

/// Burns features into a copy of `map` in list order; later features win.
IntermediateMap rasterize_features(const IntermediateMap& map, std::span<const GeoFeature> features,
                                   const RasterizeOptions& opts = {});

enum class OverlayKind { Restricted, Passable };

struct AreaOverlay {
  std::vector<Vec2> polygon;  // pixel coordinates
  OverlayKind kind = OverlayKind::Restricted;
};

double polygon_area(std::span<const Vec2> polygon);
/// Nonzero winding number of `p` with respect to the closed polygon.
int winding_number(Vec2 p, std::span<const Vec2> polygon);

/// Cells whose centers have nonzero winding become Obstacle (restricted) or
/// PassableOverride (passable).
IntermediateMap apply_area_overlay(const IntermediateMap& map, std::span<const Vec2> polygon,
                                   OverlayKind kind);

/// Applies a list of overlays; restricted polygons are burned after passable ones.
IntermediateMap apply_overlays(const IntermediateMap& map, std::span<const AreaOverlay> overlays);

/// Conservative downsampling by factor `df` (>= 1, may be fractional).
IntermediateMap downsample(const IntermediateMap& map, double df);

/// Source-cell range [begin, end) covered by downsampled cell `i` along one axis.
inline std::pair<int, int> downsample_cover(int i, double df, int source_extent) {
  const int b = static_cast<int>(std::floor(i * df));
  int e = static_cast<int>(std::floor((i + 1) * df));
  if (e > source_extent) e = source_extent;
  return {b, e};
}

// ---------------------------------------------------------------------------
// Slicing

/// Oriented sub-map around a segment, resampled onto an axis-aligned grid.
/// Slice cell (i, j) sits at parent point origin + i*u + j*v.
struct MapSlice {
  Vec2 d1, d2, d3, d4;
  Vec2 origin;
  Vec2 u{1.0, 0.0};
  Vec2 v{0.0, 1.0};
  IntermediateMap submap;

  Vec2 to_parent(Vec2 s) const { return origin + u * s.x + v * s.y; }
  Vec2 to_slice(Vec2 p) const {
    const Vec2 d = p - origin;
    return {d.dot(u), d.dot(v)};
  }
  double to_parent_heading(double slice_theta) const {
    return wrap_angle(slice_theta + std::atan2(u.y, u.x));
  }
  double to_slice_heading(double parent_theta) const {
    return wrap_angle(parent_theta - std::atan2(u.y, u.x));
  }
};

struct SliceOptions {
  /// Start/target closer than this fall back to an axis-aligned box.
  double min_separation_px = 4.0;
};

/// Corner points d1..d4 of the oriented rectangle (before clamping).
std::array<Vec2, 4> slice_corners(Vec2 s, Vec2 t, double dx, double dy);

MapSlice slice_map(const IntermediateMap& map, Vec2 s, Vec2 t, double dx, double dy,
                   const SliceOptions& opts = {});

/// Cells of the slice grid (before materializing); used to cap expansion.
size_t slice_cell_count(const IntermediateMap& map, Vec2 s, Vec2 t, double dx, double dy,
                        const SliceOptions& opts = {});

}  // namespace offroad
