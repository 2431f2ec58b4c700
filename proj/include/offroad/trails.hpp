#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "offroad/geomap.hpp"
#include "offroad/spatial.hpp"

namespace offroad {

/// Indexed set of trail pixels at full and downsampled resolution.
class TrailNetwork {
 public:
  TrailNetwork() = default;
  /// Collects every Trail cell of `map` and builds the indexes. `df` is the
  /// downsampling factor used for distance maps.
  static TrailNetwork build(const IntermediateMap& map, double df = 8.0);

  bool empty() const { return points_.empty(); }
  double df() const { return df_; }
  const std::vector<Cell>& points() const { return points_; }
  const PointIndex& rtree() const { return rtree_; }
  const KdTree2& kdtree_full() const { return kdtree_full_; }
  const KdTree2& kdtree_down() const { return kdtree_down_; }
  /// Downsampled traversability map the distance fields run on.
  const IntermediateMap& down_map() const { return down_map_; }

  /// Indices of the 8-connected trail neighbours of point `i`.
  std::vector<size_t> neighbors(size_t i) const;
  /// Index of the trail point at `c`, or -1.
  long find(Cell c) const;

  /// Nearest full-resolution trail point to `p`. Requires !empty().
  Cell nearest_full(Vec2 p) const;
  /// Downsampled trail node corresponding to a full-resolution point.
  Cell to_down(Vec2 full) const;
  /// Full-resolution trail point corresponding to a downsampled cell.
  Cell to_full(Cell down) const;

 private:
  double df_ = 8.0;
  std::vector<Cell> points_;
  std::unordered_map<uint64_t, size_t> lookup_;
  PointIndex rtree_;
  KdTree2 kdtree_full_;
  KdTree2 kdtree_down_;
  IntermediateMap down_map_;
};

// ---------------------------------------------------------------------------
// Closest valid poses

struct GoalPoseQuery {
  Pose g_o;
  /// Direction of the query rectangle's main axis (toward the other endpoint).
  double main_heading = 0.0;
  double poly_md = 50.0;
  double poly_sd = 50.0;
  double poly_md_max = 800.0;
  double poly_sd_max = 800.0;
  double md_i = 50.0;
  double sd_i = 50.0;
  double dbscan_eps = 10.0;
  int dbscan_min_pts = 3;

  void validate() const;
};

/// Oriented query rectangle centred on `center` with half-extents along/across `heading`.
std::array<Vec2, 4> query_polygon(Vec2 center, double heading, double half_main, double half_side);

/// Trail points whose whole pixel lies inside the rectangle.
std::vector<uint32_t> points_covered_by(const TrailNetwork& net, std::span<const Vec2, 4> rect);
/// Trail points whose pixel overlaps the rectangle.
std::vector<uint32_t> points_intersecting(const TrailNetwork& net, std::span<const Vec2, 4> rect);

/// Candidate trail poses near a goal. Never empty: falls back to {g_o}.
std::vector<Pose> find_closest_poses(const TrailNetwork& net, const GoalPoseQuery& q);

/// Density clustering; noise points become singleton clusters. Clusters are
/// ordered by their smallest member index and hold ascending indices.
std::vector<std::vector<size_t>> dbscan(std::span<const Vec2> points, double eps, int min_pts);

// ---------------------------------------------------------------------------
// Distance fields and trail paths

/// Trail distances from a source over an (optionally downsampled) grid.
struct DistanceField {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // +inf off-trail or unreachable
  Cell source;

  double at(Cell c) const { return values[static_cast<size_t>(c.y) * width + c.x]; }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
};

/// Trail cell of `map` nearest to `c` within `radius` cells (row-major tie-break), if any.
std::optional<Cell> snap_to_trail(const IntermediateMap& map, Cell c, double radius);

/// Uniform-cost sweep over Trail cells, 8-connected, diagonal cost sqrt(2).
DistanceField wavefront_distance(const IntermediateMap& map, Cell start, double snap_radius);

struct TrailPath {
  PixelPath points;
  double length = 0.0;
};

/// Descends `field` from `t` back to its source.
TrailPath dijkstra_trail_path(const IntermediateMap& map, const DistanceField& field, Cell t,
                              double snap_radius);

struct PairSelection {
  size_t s_index = 0;  // index into the start candidate list
  size_t t_index = 0;
  TrailPath down_path;  // downsampled coordinates
  double length = 0.0;  // downsampled pixels
};

/// Picks the (start, target) candidate pair with the shortest trail path at
/// downsampled resolution. Throws NoTrailPath if every pair is disconnected.
PairSelection select_optimal_pair(std::span<const Pose> candidates_s, std::span<const Pose> candidates_t,
                                  const TrailNetwork& net);

/// Maps a downsampled trail path back to full-resolution trail points.
PixelPath upsample_trail_path(const TrailNetwork& net, const PixelPath& down_path);

}  // namespace offroad
