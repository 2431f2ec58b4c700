#pragma once

#include <cstdint>

#include "offroad/geomap.hpp"

namespace offroad {

struct SynthOptions {
  int width = 2000;
  int height = 2000;
  double meters_per_pixel = 1.0;
  uint64_t seed = 1;
  bool trails = true;
  int trail_count = 0;           // 0 picks one per ~1.5 Mpx, at least 3
  double obstacle_fraction = 0.10;
  int rivers = 1;
  double trail_width_px = 3.0;
  /// Obstacles are cleared this far around trail centre lines.
  double trail_clearance_px = 12.0;
  double lon0 = 30.0;
  double lat0 = 56.0;
};

/// Random off-road scene: scattered obstacle blobs and buildings, rivers
/// with fords, and (optionally) a connected trail network kept clear of
/// obstacles.
IntermediateMap synth_map(const SynthOptions& opts);

}  // namespace offroad
