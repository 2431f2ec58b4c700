#pragma once

#include "offroad/geomap.hpp"

namespace offroad {

/// Population standard deviation of the curvature profile, in 1/meters.
double csd(const PixelPath& path, double meters_per_pixel = 1.0);

/// Smallest distance-transform value over the cells the path points fall in,
/// in meters. +infinity when the map has no obstacle.
double min_obstacle_distance(const PixelPath& path, const IntermediateMap& map, double meters_per_pixel = 1.0);

/// Largest absolute curvature-profile value, in 1/meters.
double max_abs_curvature(const PixelPath& path, double meters_per_pixel = 1.0);

}  // namespace offroad
