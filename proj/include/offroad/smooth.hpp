#pragma once

#include <vector>

#include "offroad/geomap.hpp"
#include "offroad/grid_search.hpp"

namespace offroad {

/// Obstacle-cost field sampled on a rectangular window of a map.
/// Window cell (i, j) is map cell (x0 + i, y0 + j).
struct VoronoiFieldGrid {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
  double alpha = 10.0;
  double d_o_max = 30.0;
  std::vector<double> d_o;
  std::vector<double> d_v;
  std::vector<double> v;

  bool contains(int x, int y) const { return x >= x0 && y >= y0 && x < x0 + width && y < y0 + height; }
  double value_at(int x, int y) const;  // clamped to the window
  /// Bilinear value and gradient at a map point.
  double sample(Vec2 p, Vec2* grad = nullptr) const;
};

/// Field over the whole map. Rejects maps without both free and obstacle cells.
VoronoiFieldGrid build_voronoi_field(const IntermediateMap& map, double alpha = 10.0, double d_o_max = 30.0);

/// Field over the window [lo, hi] (inclusive cells, clipped to the map). A
/// window without obstacles yields v = 0 everywhere.
VoronoiFieldGrid build_voronoi_field_window(const IntermediateMap& map, Cell lo, Cell hi, double alpha = 10.0,
                                            double d_o_max = 30.0);

struct SmoothingParams {
  double lambda_o = 0.3;
  double lambda_k = 0.4;
  double lambda_s = 0.3;
  double k_max = 0.2;              // 1/meters
  double meters_per_pixel = 1.0;
  double max_spacing = 2.0;        // densification, pixels
  int max_iterations = 500;
  double tolerance = 1e-6;         // relative change of J
  double armijo_c = 1e-4;
  double max_move = 0.5;           // largest vertex displacement per step, pixels
  /// Allowed discrete curvature before a step counts as creating a violation.
  double curvature_tolerance = 0.05;

  double k_max_px() const { return k_max * meters_per_pixel; }
  void validate() const;
};

/// Signed curvature at interior vertices: turn angle over the incoming step.
/// Index j of the result belongs to vertex j + 1.
std::vector<double> curvature_profile(const PixelPath& path);

struct CostTerms {
  double J_o = 0.0;
  double J_k = 0.0;
  double J_s = 0.0;
  double J = 0.0;
};

CostTerms cost_terms(const PixelPath& path, const VoronoiFieldGrid& field, const SmoothingParams& params);
/// Cost and its gradient with respect to every vertex coordinate.
CostTerms cost_gradient(const PixelPath& path, const VoronoiFieldGrid& field, const SmoothingParams& params,
                        std::vector<Vec2>& grad);

/// Splits segments so that consecutive points are at most `max_spacing` apart.
/// `origin` (optional) receives, for each output point, the index of the input
/// vertex it equals or -1 for inserted points.
PixelPath densify(const PixelPath& path, double max_spacing, std::vector<long>* origin = nullptr);

struct SmoothResult {
  PixelPath path;
  std::vector<double> history;  // J after each accepted iteration, starting with the input
  std::vector<uint8_t> frozen;  // per output vertex
  int iterations = 0;
};

/// Gradient descent on J over the non-frozen vertices of the densified path.
/// `frozen` is indexed by input vertex; endpoints are always fixed. Steps that
/// leave passable cells, cut through blocked cells, or push a vertex's
/// discrete curvature over the limit are rejected by the line search.
/// Segments that are not clear in `map` to begin with are checked against
/// the first of `fallbacks` they are clear in (the uninflated map otherwise).
SmoothResult smooth_path(const PixelPath& path, const ClearanceMap& map, const VoronoiFieldGrid& field,
                         const SmoothingParams& params, const std::vector<uint8_t>& frozen = {},
                         const std::vector<const ClearanceMap*>& fallbacks = {});

}  // namespace offroad
