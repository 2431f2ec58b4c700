#pragma once

#include <array>
#include <optional>
#include <vector>

#include "offroad/geometry.hpp"

namespace offroad {

enum class DubinsWord { LSL, RSR, LSR, RSL, RLR, LRL };

/// Shortest forward-only path between two poses with a bounded turning radius.
struct DubinsPath {
  Pose start;
  double rho = 1.0;
  DubinsWord word = DubinsWord::LSL;
  std::array<double, 3> lengths{};  // per segment, in path units (not normalised)

  double length() const { return lengths[0] + lengths[1] + lengths[2]; }
  /// Pose at arc length `s` from the start, 0 <= s <= length().
  Pose at(double s) const;
  /// Poses every `step` along the path, always including both ends.
  std::vector<Pose> sample(double step) const;
};

/// Shortest of the six candidate words, or nullopt if none is valid
/// (only possible for degenerate input such as rho <= 0).
std::optional<DubinsPath> dubins_shortest(Pose from, Pose to, double rho);

/// Length of the shortest Dubins path (infinity if none).
double dubins_length(Pose from, Pose to, double rho);

}  // namespace offroad
