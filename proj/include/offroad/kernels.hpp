#pragma once

// Data-parallel grid kernels. Every kernel has a plain serial reference in
// `ref` and an OpenMP version in `par`; both produce identical output and the
// library calls `par`. The references stay for tests and the benchmark target.

#include <cstdint>
#include <span>
#include <vector>

#include "offroad/geomap.hpp"

namespace offroad::kernels {

/// Exact Euclidean distance transform with nearest-site labels.
struct EdtResult {
  int width = 0;
  int height = 0;
  std::vector<double> dist;   // +inf where no site exists
  std::vector<int32_t> site;  // flat index of the nearest site, -1 if none
};

struct VoronoiLayers {
  std::vector<double> d_o;  // distance to nearest obstacle cell
  std::vector<double> d_v;  // distance to nearest Voronoi edge cell
  std::vector<double> v;    // field value in [0, 1]
  std::vector<uint8_t> edge;
};

/// Scalar field value from the obstacle/edge distances.
double voronoi_value(double d_o, double d_v, double alpha, double d_o_max);

namespace ref {
EdtResult edt(int width, int height, std::span<const uint8_t> is_site);
std::vector<CellClass> downsample(const IntermediateMap& map, double df, int out_w, int out_h);
void fill_polygon(std::span<CellClass> cells, int width, int height, std::span<const Vec2> polygon,
                  CellClass value);
/// Marks every `inflatable` cell whose center lies closer than `radius` to a
/// blocked cell's square as blocked.
std::vector<uint8_t> inflate(int width, int height, std::span<const uint8_t> blocked,
                             std::span<const uint8_t> inflatable, double radius);
VoronoiLayers voronoi_field(int width, int height, std::span<const uint8_t> obstacle, double alpha,
                            double d_o_max);
}  // namespace ref

namespace par {
EdtResult edt(int width, int height, std::span<const uint8_t> is_site);
std::vector<CellClass> downsample(const IntermediateMap& map, double df, int out_w, int out_h);
void fill_polygon(std::span<CellClass> cells, int width, int height, std::span<const Vec2> polygon,
                  CellClass value);
std::vector<uint8_t> inflate(int width, int height, std::span<const uint8_t> blocked,
                             std::span<const uint8_t> inflatable, double radius);
VoronoiLayers voronoi_field(int width, int height, std::span<const uint8_t> obstacle, double alpha,
                            double d_o_max);
}  // namespace par

/// Number of OpenMP threads the `par` kernels will use.
int max_threads();

}  // namespace offroad::kernels
