#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "offroad/geomap.hpp"
#include "offroad/grid_search.hpp"
#include "offroad/kino.hpp"
#include "offroad/smooth.hpp"
#include "offroad/trails.hpp"

namespace offroad {

enum class PlanMode { TrailPreferred, Direct };
enum class SegmentKind { OffroadStart, Trail, OffroadEnd, Direct };

const char* to_string(PlanMode m);
const char* to_string(SegmentKind k);

struct PlannerParams {
  double vehicle_width_m = 2.0;
  /// Extra clearance that shortcuts and smoothing keep where the grid path
  /// already does.
  double clearance_margin_m = 1.0;
  // Closest-pose search (pixels).
  double poly_md = 50.0, poly_sd = 50.0;
  double poly_md_max = 800.0, poly_sd_max = 800.0;
  double md_i = 50.0, sd_i = 50.0;
  double dbscan_eps = 10.0;
  int dbscan_min_pts = 3;
  // Smoothing.
  double alpha = 10.0;
  double d_o_max = 30.0;
  double lambda_o = 0.3, lambda_k = 0.4, lambda_s = 0.3;
  int max_iterations = 500;
  size_t smooth_chunk = 400;
  // Repair.
  double slice_offset = 100.0;
  size_t max_expansions = 200000;
  // Stages; the raw variant stops after concatenating the grid paths.
  bool simplify = true;
  bool repair = true;
  bool smooth = true;
  /// Wall-clock budget in seconds; 0 disables it.
  double time_budget_s = 0.0;
};

struct PlanEndpoint {
  double lon = 0.0;
  double lat = 0.0;
  std::optional<double> heading;  // radians, pixel frame
};

struct PlanRequest {
  PlanEndpoint start;
  PlanEndpoint target;
  PlanMode mode = PlanMode::TrailPreferred;
  double wheelbase_m = 2.5;
  double phi_max = 0.5;
  std::vector<AreaOverlay> overlays;
  GridPlanner planner = GridPlanner::Jps;
  PlannerParams params;
};

struct PathSegment {
  SegmentKind kind = SegmentKind::Trail;
  PixelPath pixels;
};

struct PlanMetrics {
  double length_m = 0.0;
  double max_curvature = 0.0;  // 1/m, discrete vertex curvature
  double csd = 0.0;            // 1/m
  double mod = 0.0;            // m, +inf when unbounded
  std::vector<std::pair<std::string, double>> stage_ms;
  double total_ms = 0.0;
  long peak_memory_bytes = 0;
};

struct PlanResult {
  std::vector<PathSegment> segments;
  PixelPath path;
  std::vector<GeoPoint> geo;
  PlanMetrics metrics;
  PlanMode mode_used = PlanMode::TrailPreferred;
  bool fell_back_to_direct = false;
  std::optional<Pose> s_bar;
  std::optional<Pose> t_bar;
  size_t repaired_segments = 0;
  double meters_per_pixel = 1.0;
  double k_max = 0.0;  // 1/m
  GeoTransform transform;
};

/// Map plus trail index with a set of overlays applied.
struct MapLayer {
  IntermediateMap map;
  TrailNetwork net;
};

/// Runs the full planning flow on an already overlaid map and its trail index.
/// `request.overlays` is ignored here.
PlanResult plan_on_layer(const PlanRequest& request, const IntermediateMap& map, const TrailNetwork& net);

/// Applies the request's overlays to `map` (rebuilding the trail index when
/// there are any) and plans.
PlanResult plan(const PlanRequest& request, const IntermediateMap& map, const TrailNetwork& net);

/// Base map, its trail index, and a small cache of overlaid layers. Safe to
/// share between threads.
class PlanningContext {
 public:
  explicit PlanningContext(IntermediateMap base, double df = 8.0);

  const IntermediateMap& base_map() const { return base_->map; }
  const TrailNetwork& base_net() const { return base_->net; }
  double df() const { return df_; }

  std::shared_ptr<const MapLayer> layer(const std::vector<AreaOverlay>& overlays);
  PlanResult plan(const PlanRequest& request);

 private:
  double df_;
  std::shared_ptr<const MapLayer> base_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const MapLayer>> cache_;
};

/// Plans `previous` again under a new overlay list.
PlanResult replan_with_overlays(PlanningContext& ctx, const PlanRequest& previous,
                                std::vector<AreaOverlay> overlays);

}  // namespace offroad
