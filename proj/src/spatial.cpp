#include "offroad/spatial.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

namespace offroad {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

KdTree2::KdTree2(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.empty()) return;
  std::vector<uint32_t> ids(points_.size());
  std::iota(ids.begin(), ids.end(), 0u);
  nodes_.reserve(points_.size());
  root_ = build(ids, 0);
}

int32_t KdTree2::build(std::span<uint32_t> ids, int depth) {
  if (ids.empty()) return -1;
  const uint8_t axis = depth % 2;
  const size_t mid = ids.size() / 2;
  std::nth_element(ids.begin(), ids.begin() + mid, ids.end(), [&](uint32_t a, uint32_t b) {
    const double ka = axis ? points_[a].y : points_[a].x;
    const double kb = axis ? points_[b].y : points_[b].x;
    return ka < kb || (ka == kb && a < b);
  });
  const auto idx = static_cast<int32_t>(nodes_.size());
  nodes_.push_back({ids[mid], -1, -1, axis});
  const int32_t l = build(ids.subspan(0, mid), depth + 1);
  const int32_t r = build(ids.subspan(mid + 1), depth + 1);
  nodes_[idx].left = l;
  nodes_[idx].right = r;
  return idx;
}

void KdTree2::search(int32_t node, Vec2 q, size_t& best, double& best_d2) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Vec2 p = points_[n.point];
  const double d2 = (p - q).dot(p - q);
  if (d2 < best_d2 || (d2 == best_d2 && n.point < best)) {
    best_d2 = d2;
    best = n.point;
  }
  const double diff = n.axis ? q.y - p.y : q.x - p.x;
  const int32_t near = diff < 0 ? n.left : n.right;
  const int32_t far = diff < 0 ? n.right : n.left;
  search(near, q, best, best_d2);
  if (diff * diff <= best_d2) search(far, q, best, best_d2);
}

size_t KdTree2::nearest(Vec2 q) const {
  size_t best = std::numeric_limits<size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(root_, q, best, best_d2);
  return best;
}

// ---------------------------------------------------------------------------

struct PointIndex::Impl {
  using Point = bg::model::point<double, 2, bg::cs::cartesian>;
  using Box = bg::model::box<Point>;
  using Value = std::pair<Point, uint32_t>;
  bgi::rtree<Value, bgi::quadratic<16>> tree;
};

PointIndex::PointIndex() : impl_(std::make_unique<Impl>()) {}

PointIndex::PointIndex(std::span<const Cell> points) : impl_(std::make_unique<Impl>()) {
  std::vector<Impl::Value> values;
  values.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i)
    values.emplace_back(Impl::Point(points[i].x, points[i].y), static_cast<uint32_t>(i));
  impl_->tree = decltype(impl_->tree)(values.begin(), values.end());  // packed bulk load
}

PointIndex::~PointIndex() = default;
PointIndex::PointIndex(PointIndex&&) noexcept = default;
PointIndex& PointIndex::operator=(PointIndex&&) noexcept = default;

size_t PointIndex::size() const { return impl_->tree.size(); }

std::vector<uint32_t> PointIndex::query_box(Vec2 lo, Vec2 hi) const {
  std::vector<Impl::Value> hits;
  impl_->tree.query(bgi::intersects(Impl::Box(Impl::Point(lo.x, lo.y), Impl::Point(hi.x, hi.y))),
                    std::back_inserter(hits));
  std::vector<uint32_t> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace offroad
