#include "offroad/smooth.hpp"

#include <algorithm>
#include <cmath>

#include "offroad/kernels.hpp"
#include "offroad/kino.hpp"

namespace offroad {

namespace {

VoronoiFieldGrid field_from_window(const IntermediateMap& map, int x0, int y0, int w, int h, double alpha,
                                   double d_o_max, bool require_mixed) {
  if (!(alpha > 0) || !(d_o_max > 0))
    throw PlanningError(ErrorKind::InvalidArgument, "alpha and d_o_max must be positive", "smooth");
  std::vector<uint8_t> obstacle(static_cast<size_t>(w) * h);
  size_t blocked = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool b = !traversable(map.at(x0 + x, y0 + y));
      obstacle[static_cast<size_t>(y) * w + x] = b;
      blocked += b;
    }
  if (require_mixed && (blocked == 0 || blocked == obstacle.size()))
    throw PlanningError(ErrorKind::InvalidArgument, "field needs both free and obstacle cells", "smooth");
  VoronoiFieldGrid f;
  f.x0 = x0;
  f.y0 = y0;
  f.width = w;
  f.height = h;
  f.alpha = alpha;
  f.d_o_max = d_o_max;
  if (blocked == 0) {
    const double inf = std::numeric_limits<double>::infinity();
    f.d_o.assign(obstacle.size(), inf);
    f.d_v.assign(obstacle.size(), inf);
    f.v.assign(obstacle.size(), 0.0);
    return f;
  }
  auto layers = kernels::par::voronoi_field(w, h, obstacle, alpha, d_o_max);
  f.d_o = std::move(layers.d_o);
  f.d_v = std::move(layers.d_v);
  f.v = std::move(layers.v);
  return f;
}

// Unit normal of a segment direction scaled by 1/|d|: the derivative of its
// heading with respect to the segment's end point.
Vec2 heading_gradient(Vec2 d) {
  const double n2 = d.dot(d);
  return {-d.y / n2, d.x / n2};
}

}  // namespace

double VoronoiFieldGrid::value_at(int x, int y) const {
  x = std::clamp(x - x0, 0, width - 1);
  y = std::clamp(y - y0, 0, height - 1);
  return v[static_cast<size_t>(y) * width + x];
}

double VoronoiFieldGrid::sample(Vec2 p, Vec2* grad) const {
  const double fx0 = std::floor(p.x), fy0 = std::floor(p.y);
  const int ix = static_cast<int>(fx0), iy = static_cast<int>(fy0);
  const double tx = p.x - fx0, ty = p.y - fy0;
  const double v00 = value_at(ix, iy), v10 = value_at(ix + 1, iy);
  const double v01 = value_at(ix, iy + 1), v11 = value_at(ix + 1, iy + 1);
  if (grad) {
    grad->x = (1 - ty) * (v10 - v00) + ty * (v11 - v01);
    grad->y = (1 - tx) * (v01 - v00) + tx * (v11 - v10);
  }
  return (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
}

VoronoiFieldGrid build_voronoi_field(const IntermediateMap& map, double alpha, double d_o_max) {
  return field_from_window(map, 0, 0, map.width(), map.height(), alpha, d_o_max, true);
}

VoronoiFieldGrid build_voronoi_field_window(const IntermediateMap& map, Cell lo, Cell hi, double alpha,
                                            double d_o_max) {
  const int x0 = std::clamp(lo.x, 0, map.width() - 1), y0 = std::clamp(lo.y, 0, map.height() - 1);
  const int x1 = std::clamp(hi.x, x0, map.width() - 1), y1 = std::clamp(hi.y, y0, map.height() - 1);
  return field_from_window(map, x0, y0, x1 - x0 + 1, y1 - y0 + 1, alpha, d_o_max, false);
}

void SmoothingParams::validate() const {
  if (lambda_o < 0 || lambda_k < 0 || lambda_s < 0)
    throw PlanningError(ErrorKind::InvalidArgument, "smoothing weights must be nonnegative", "smooth");
  if (!(k_max > 0) || !(meters_per_pixel > 0) || !(max_spacing > 0) || max_iterations < 0)
    throw PlanningError(ErrorKind::InvalidArgument, "invalid smoothing parameters", "smooth");
}

// ---------------------------------------------------------------------------

std::vector<double> curvature_profile(const PixelPath& path) {
  if (path.size() < 3) throw PlanningError(ErrorKind::InvalidArgument, "curvature needs at least 3 points");
  std::vector<double> k;
  k.reserve(path.size() - 2);
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    const Vec2 a = path[i] - path[i - 1], b = path[i + 1] - path[i];
    if (a.norm() == 0.0 || b.norm() == 0.0)
      throw PlanningError(ErrorKind::InvalidArgument, "repeated consecutive points");
    const double dth = wrap_angle(std::atan2(b.y, b.x) - std::atan2(a.y, a.x));
    k.push_back(dth / a.norm());
  }
  return k;
}

CostTerms cost_gradient(const PixelPath& path, const VoronoiFieldGrid& field, const SmoothingParams& params,
                        std::vector<Vec2>& grad) {
  const size_t n = path.size();
  grad.assign(n, Vec2{});
  CostTerms c;
  const double kmax = params.k_max_px();

  for (size_t i = 0; i < n; ++i) {
    Vec2 g;
    c.J_o += field.sample(path[i], &g);
    grad[i] += g * params.lambda_o;
  }

  for (size_t i = 1; i + 1 < n; ++i) {
    const Vec2 e = path[i + 1] - path[i] * 2.0 + path[i - 1];
    c.J_s += e.dot(e);
    grad[i + 1] += e * (2.0 * params.lambda_s);
    grad[i] += e * (-4.0 * params.lambda_s);
    grad[i - 1] += e * (2.0 * params.lambda_s);

    const Vec2 a = path[i] - path[i - 1], b = path[i + 1] - path[i];
    const double la = a.norm();
    if (la < 1e-12 || b.norm() < 1e-12) continue;
    const double dth = wrap_angle(std::atan2(b.y, b.x) - std::atan2(a.y, a.x));
    const double k = dth / la;
    const double excess = std::abs(k) - kmax;
    if (excess <= 0) continue;
    c.J_k += excess * excess;
    // d(excess)/dp = sign(k) * (d(dth)/dp / la - dth * d(la)/dp / la^2)
    const double w = 2.0 * excess * (k > 0 ? 1.0 : -1.0) * params.lambda_k;
    const Vec2 na = heading_gradient(a), nb = heading_gradient(b);
    const Vec2 ua = a / la;
    grad[i + 1] += nb * (w / la);
    grad[i] += (nb * -1.0 - na) * (w / la) - ua * (w * dth / (la * la));
    grad[i - 1] += na * (w / la) + ua * (w * dth / (la * la));
  }
  c.J = params.lambda_o * c.J_o + params.lambda_k * c.J_k + params.lambda_s * c.J_s;
  return c;
}

CostTerms cost_terms(const PixelPath& path, const VoronoiFieldGrid& field, const SmoothingParams& params) {
  std::vector<Vec2> grad;
  return cost_gradient(path, field, params, grad);
}

PixelPath densify(const PixelPath& path, double max_spacing, std::vector<long>* origin) {
  PixelPath out;
  if (origin) origin->clear();
  for (size_t i = 0; i < path.size(); ++i) {
    if (i > 0) {
      const Vec2 a = path[i - 1], b = path[i];
      const int parts = static_cast<int>(std::ceil(distance(a, b) / max_spacing - 1e-9));
      for (int k = 1; k < parts; ++k) {
        out.push_back(a + (b - a) * (double(k) / parts));
        if (origin) origin->push_back(-1);
      }
    }
    out.push_back(path[i]);
    if (origin) origin->push_back(static_cast<long>(i));
  }
  return out;
}

// ---------------------------------------------------------------------------

SmoothResult smooth_path(const PixelPath& path, const ClearanceMap& map, const VoronoiFieldGrid& field,
                         const SmoothingParams& params, const std::vector<uint8_t>& frozen,
                         const std::vector<const ClearanceMap*>& fallbacks) {
  params.validate();
  SmoothResult res;
  std::vector<long> origin;
  PixelPath x = densify(path, params.max_spacing, &origin);
  const size_t n = x.size();

  // Inserted points inherit the frozen state of a fully frozen parent segment.
  res.frozen.assign(n, 0);
  auto is_frozen = [&](long i) { return i >= 0 && static_cast<size_t>(i) < frozen.size() && frozen[i]; };
  long prev = -1;
  for (size_t i = 0; i < n; ++i) {
    if (origin[i] >= 0) {
      res.frozen[i] = is_frozen(origin[i]);
      prev = origin[i];
    } else {
      res.frozen[i] = is_frozen(prev) && is_frozen(prev + 1);
    }
  }
  if (n) res.frozen.front() = res.frozen.back() = 1;

  const IntermediateMap& base = map.map();
  std::vector<const ClearanceMap*> tiers{&map};
  tiers.insert(tiers.end(), fallbacks.begin(), fallbacks.end());
  const uint8_t loose_level = static_cast<uint8_t>(tiers.size());
  // Stretches that already violate the clearance (e.g. an endpoint next to a
  // wall) are held to the first fallback they satisfy, or failing that to the
  // uninflated map.
  std::vector<uint8_t> level(n ? n - 1 : 0, 0);
  for (size_t i = 0; i + 1 < n; ++i) {
    uint8_t lv = 0;
    while (lv < loose_level &&
           !line_of_sight(x[i], x[i + 1], [&](int cx, int cy) { return tiers[lv]->passable(cx, cy); }))
      ++lv;
    level[i] = lv;
  }

  const double limit = params.k_max_px() * (1.0 + params.curvature_tolerance);
  auto segment_ok = [&](Vec2 a, Vec2 b, uint8_t lv) {
    if (lv == loose_level) return line_of_sight(a, b, [&](int cx, int cy) { return base.is_traversable(cx, cy); });
    return line_of_sight(a, b, [&](int cx, int cy) { return tiers[lv]->passable(cx, cy); });
  };
  // Marks vertices whose move breaks a segment or raises an over-limit
  // curvature; returns false when there were any.
  std::vector<double> k_cur = vertex_curvatures(x);
  auto screen = [&](const PixelPath& p, std::vector<uint8_t>& hold) {
    bool clean = true;
    auto mark = [&](size_t i) {
      if (!res.frozen[i] && !hold[i]) {
        hold[i] = 1;
        clean = false;
      }
    };
    for (size_t i = 0; i + 1 < n; ++i) {
      const bool moved = !res.frozen[i] || !res.frozen[i + 1];
      if (!moved) continue;
      if (!segment_ok(p[i], p[i + 1], level[i]) || distance(p[i], p[i + 1]) < 1e-3) {
        mark(i);
        mark(i + 1);
      }
    }
    const std::vector<double> k = vertex_curvatures(p);
    for (size_t i = 1; i + 1 < n; ++i)
      if (k[i] > limit && k[i] > k_cur[i] + 1e-12) {
        mark(i - 1);
        mark(i);
        mark(i + 1);
      }
    return clean;
  };

  std::vector<Vec2> g;
  CostTerms cur = cost_gradient(x, field, params, g);
  res.history.push_back(cur.J);
  double t = 1.0;
  PixelPath trial(n);
  std::vector<Vec2> g_trial;
  std::vector<uint8_t> hold(n);
  for (int it = 0; it < params.max_iterations; ++it) {
    double gmax = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (res.frozen[i]) g[i] = {};
      gmax = std::max(gmax, g[i].norm());
    }
    if (gmax <= 0.0) break;
    t = std::min(t * 4.0, params.max_move / gmax);
    bool accepted = false;
    CostTerms next;
    for (int bt = 0; bt < 50 && t > 1e-14; ++bt, t *= 0.5) {
      std::fill(hold.begin(), hold.end(), 0);
      bool clean = false;
      for (int pass = 0; pass < 8 && !clean; ++pass) {
        for (size_t i = 0; i < n; ++i) trial[i] = res.frozen[i] || hold[i] ? x[i] : x[i] - g[i] * t;
        clean = screen(trial, hold);
      }
      if (!clean) continue;
      double g2 = 0.0;
      for (size_t i = 0; i < n; ++i)
        if (!hold[i]) g2 += g[i].dot(g[i]);
      if (g2 <= 0.0) continue;
      next = cost_gradient(trial, field, params, g_trial);
      if (next.J > cur.J - params.armijo_c * t * g2) continue;
      accepted = true;
      break;
    }
    if (!accepted) break;
    const double drop = cur.J - next.J;
    x.swap(trial);
    g.swap(g_trial);
    k_cur = vertex_curvatures(x);
    cur = next;
    res.history.push_back(cur.J);
    res.iterations = it + 1;
    if (drop <= params.tolerance * std::max(1.0, std::abs(cur.J))) break;
  }
  res.path = std::move(x);
  return res;
}

}  // namespace offroad
