#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "offroad/geometry.hpp"

namespace offroad {

/// Static 2-D k-d tree for nearest-neighbour lookups.
class KdTree2 {
 public:
  KdTree2() = default;
  explicit KdTree2(std::vector<Vec2> points);

  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec2& point(size_t i) const { return points_[i]; }

  /// Index of the nearest point; ties go to the lowest index. Requires !empty().
  size_t nearest(Vec2 q) const;

 private:
  struct Node {
    uint32_t point;
    int32_t left = -1;
    int32_t right = -1;
    uint8_t axis = 0;
  };
  int32_t build(std::span<uint32_t> ids, int depth);
  void search(int32_t node, Vec2 q, size_t& best, double& best_d2) const;

  std::vector<Vec2> points_;
  std::vector<Node> nodes_;
  int32_t root_ = -1;
};

/// Rectangle query index over integer points (R-tree).
class PointIndex {
 public:
  PointIndex();
  explicit PointIndex(std::span<const Cell> points);
  ~PointIndex();
  PointIndex(PointIndex&&) noexcept;
  PointIndex& operator=(PointIndex&&) noexcept;

  size_t size() const;
  /// Indices of points inside the closed box [lo, hi], sorted ascending.
  std::vector<uint32_t> query_box(Vec2 lo, Vec2 hi) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace offroad
