#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace offroad {

/// Planar point or vector in pixel space. Cell (x, y) has its center at (x, y).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Integer grid cell.
struct Cell {
  int x = 0;
  int y = 0;
  constexpr bool operator==(const Cell&) const = default;
  constexpr Vec2 center() const { return {double(x), double(y)}; }
};

inline Cell cell_of(Vec2 p) {
  return {static_cast<int>(std::floor(p.x + 0.5)), static_cast<int>(std::floor(p.y + 0.5))};
}

/// Position plus heading (radians, counter-clockwise from +x in pixel space).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  constexpr Vec2 pos() const { return {x, y}; }
  constexpr bool operator==(const Pose&) const = default;
};

using PixelPath = std::vector<Vec2>;

/// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

inline double heading(Vec2 from, Vec2 to) { return std::atan2(to.y - from.y, to.x - from.x); }

/// Total Euclidean length of a polyline.
inline double path_length(const PixelPath& path) {
  double len = 0.0;
  for (size_t i = 1; i < path.size(); ++i) len += distance(path[i - 1], path[i]);
  return len;
}

/// Curvature of the circle through three points (Menger curvature); 0 for collinear or repeated points.
inline double menger_curvature(Vec2 p, Vec2 q, Vec2 r) {
  const double a = distance(p, q);
  const double b = distance(q, r);
  const double c = distance(p, r);
  const double denom = a * b * c;
  if (denom <= 0.0) return 0.0;
  return 2.0 * std::abs((q - p).cross(r - p)) / denom;
}

}  // namespace offroad
