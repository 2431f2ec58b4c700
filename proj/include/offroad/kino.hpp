#pragma once

#include <vector>

#include "offroad/errors.hpp"
#include "offroad/geomap.hpp"
#include "offroad/grid_search.hpp"

namespace offroad {

/// Bicycle model: wheelbase and steering limit, plus the map scale used to
/// express its turning limits in pixels.
class KinematicModel {
 public:
  KinematicModel() = default;
  KinematicModel(double wheelbase_m, double phi_max, double meters_per_pixel = 1.0);

  double wheelbase() const { return wheelbase_; }
  double phi_max() const { return phi_max_; }
  double meters_per_pixel() const { return mpp_; }

  double rho_min() const { return wheelbase_ / std::tan(phi_max_); }  // meters
  double k_max() const { return 1.0 / rho_min(); }                    // 1/meters
  double rho_min_px() const { return rho_min() / mpp_; }
  double k_max_px() const { return 1.0 / rho_min_px(); }

 private:
  double wheelbase_ = 2.5;
  double phi_max_ = 0.5;
  double mpp_ = 1.0;
};

double min_turning_radius(const KinematicModel& model);

/// Bicycle state derivative for speed `u_s` and steering `u_phi`.
Pose bicycle_derivative(const Pose& q, double u_s, double u_phi, double wheelbase);
/// One classical Runge-Kutta step of the bicycle model.
Pose bicycle_rk4_step(const Pose& q, double u_s, double u_phi, double wheelbase, double dt);

/// Vertex-to-centre distance of the turning circle inscribed in a corner of
/// interior angle `alpha`.
double corner_center_distance(double alpha, double rho, double eps = 1e-4);

struct InfeasibleVertex {
  size_t index = 0;  // vertex index in the input path
  Pose Q;
  double alpha = 0.0;  // interior angle at Q, radians
  double s = 0.0;      // |QA|, pixels
  Pose A;              // circle centre (heading unused)
  Pose Q1, Q2;         // anchors on the incoming and outgoing side
  double arc_q1 = 0.0;  // arc-length positions of the anchors along the path
  double arc_q2 = 0.0;
};

/// Stretch of path to be replanned, in arc length, with its end poses.
struct RepairSegment {
  double arc_begin = 0.0;
  double arc_end = 0.0;
  Pose q1, q2;
  std::vector<size_t> vertices;  // infeasible vertices it covers
};

struct FeasibilityOptions {
  /// Vertices are flagged when their discrete curvature exceeds k_max * (1 + tolerance).
  double tolerance = 0.05;
  double eps = 1e-4;
  /// Extra run-in added beyond each tangent point, as a fraction of rho_min.
  double anchor_margin = 0.5;
};

/// Discrete curvature of every vertex (0 at the two ends), in 1/pixel.
std::vector<double> vertex_curvatures(const PixelPath& path);
double max_vertex_curvature(const PixelPath& path);

std::vector<InfeasibleVertex> find_infeasible_vertices(const PixelPath& path, const KinematicModel& model,
                                                       const FeasibilityOptions& opts = {});

/// Merges overlapping anchor intervals into replanning segments.
std::vector<RepairSegment> repair_segments(const PixelPath& path, const KinematicModel& model,
                                           const FeasibilityOptions& opts = {});

/// Point and heading at arc length `s` along the path.
Pose pose_at_arclength(const PixelPath& path, double s);

struct HybridAStarOptions {
  int heading_bins = 72;
  double primitive_length = 2.0;  // pixels
  double sample_step = 1.0;       // output spacing, pixels
  double collision_step = 0.5;
  bool allow_reverse = false;
  size_t max_expansions = 200000;
  /// Obstacle inflation radius, pixels.
  double clearance = 0.0;
};

/// Kinematically feasible path from q1 to q2 inside the slice. Poses are in
/// parent-map coordinates. With `parent`, collisions are checked against it
/// (restricted to the slice rectangle); otherwise against the resampled slice.
PixelPath hybrid_astar(const MapSlice& slice, Pose q1, Pose q2, const KinematicModel& model,
                       const HybridAStarOptions& opts = {}, const ClearanceMap* parent = nullptr,
                       const Deadline& deadline = {});

struct RepairOptions {
  FeasibilityOptions feasibility;
  HybridAStarOptions search;
  double initial_offset = 100.0;  // d_x = d_y on the first slice, pixels
  double growth = 2.0;
  size_t max_slice_cells = 50'000'000;
  int max_rounds = 6;
  /// Tried in order on the initial slice with a small expansion budget; the
  /// repair map is used when they all fail.
  std::vector<const ClearanceMap*> preferred;
  size_t preferred_expansions = 20000;
};

struct RepairReport {
  PixelPath path;
  size_t segments_repaired = 0;
  /// [first, last] vertex indices of each replanned stretch in the output.
  std::vector<std::pair<size_t, size_t>> replanned;
};

/// Replaces every infeasible stretch with a Hybrid A* segment.
RepairReport repair_path(const PixelPath& path, const ClearanceMap& map, const KinematicModel& model,
                         const RepairOptions& opts = {}, const Deadline& deadline = {});

}  // namespace offroad
