#include "offroad/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace offroad::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) over one line with
// argmin tracking. `f` holds squared distances (inf = no site); `d` receives
// the transformed values, `arg` the index of the winning parabola or -1.
void dt1d(const double* f, int n, double* d, int* arg, int* v, double* z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) {
      d[q] = kInf;
      arg[q] = -1;
    }
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const int p = v[j];
    d[q] = double(q - p) * (q - p) + f[p];
    arg[q] = p;
  }
}

// Column sweep: nearest site row per cell within its column, for columns [x0, x1).
void column_pass(int width, int height, std::span<const uint8_t> is_site, std::vector<int32_t>& row,
                 int x0, int x1) {
  for (int y = 0; y < height; ++y) {
    const size_t off = static_cast<size_t>(y) * width;
    for (int x = x0; x < x1; ++x) {
      if (is_site[off + x]) {
        row[off + x] = y;
      } else if (y > 0) {
        row[off + x] = row[off - width + x];
      } else {
        row[off + x] = -1;
      }
    }
  }
  for (int y = height - 2; y >= 0; --y) {
    const size_t off = static_cast<size_t>(y) * width;
    for (int x = x0; x < x1; ++x) {
      const int32_t below = row[off + width + x];
      if (below < 0) continue;
      const int32_t cur = row[off + x];
      if (cur < 0 || (below - y) < (y - cur)) row[off + x] = below;
    }
  }
}

void row_pass(int width, int y, const std::vector<int32_t>& row, EdtResult& out,
              std::vector<double>& f, std::vector<double>& d, std::vector<int>& arg,
              std::vector<int>& v, std::vector<double>& z) {
  const size_t off = static_cast<size_t>(y) * width;
  for (int x = 0; x < width; ++x) {
    const int32_t r = row[off + x];
    f[x] = r < 0 ? kInf : double(y - r) * (y - r);
  }
  dt1d(f.data(), width, d.data(), arg.data(), v.data(), z.data());
  for (int x = 0; x < width; ++x) {
    if (arg[x] < 0) {
      out.dist[off + x] = kInf;
      out.site[off + x] = -1;
    } else {
      out.dist[off + x] = std::sqrt(d[x]);
      const int sx = arg[x];
      out.site[off + x] = row[off + sx] * width + sx;
    }
  }
}

CellClass downsample_cell(const IntermediateMap& map, double df, int ox, int oy) {
  const auto [x0, x1] = downsample_cover(ox, df, map.width());
  const auto [y0, y1] = downsample_cover(oy, df, map.height());
  bool trail = false;
  bool passable = false;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const CellClass c = map.at(x, y);
      if (!traversable(c)) return c;
      trail |= c == CellClass::Trail;
      passable |= c == CellClass::PassableOverride;
    }
  }
  if (trail) return CellClass::Trail;
  if (passable) return CellClass::PassableOverride;
  return CellClass::Free;
}

struct Bounds {
  int x0, y0, x1, y1;  // inclusive
};

Bounds polygon_cell_bounds(std::span<const Vec2> polygon, int width, int height) {
  double minx = kInf, miny = kInf, maxx = -kInf, maxy = -kInf;
  for (const Vec2& p : polygon) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
    maxx = std::max(maxx, p.x);
    maxy = std::max(maxy, p.y);
  }
  return {std::max(0, int(std::ceil(minx))), std::max(0, int(std::ceil(miny))),
          std::min(width - 1, int(std::floor(maxx))), std::min(height - 1, int(std::floor(maxy)))};
}

// Offsets whose cell center lies closer than `radius` to the unit square of
// the origin cell.
std::vector<Cell> disk_offsets(double radius) {
  std::vector<Cell> offsets;
  const int r = static_cast<int>(std::ceil(radius + 0.5));
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double ex = std::max(std::abs(dx) - 0.5, 0.0), ey = std::max(std::abs(dy) - 0.5, 0.0);
      if (ex * ex + ey * ey < radius * radius) offsets.push_back({dx, dy});
    }
  return offsets;
}

// Free cell whose 4-neighbour has a different, non-adjacent nearest obstacle
// that is about as far away as its own.
bool is_voronoi_edge(int width, int height, int x, int y, const EdtResult& obst,
                     std::span<const uint8_t> obstacle) {
  const size_t i = static_cast<size_t>(y) * width + x;
  if (obstacle[i] || obst.site[i] < 0) return false;
  const int32_t own = obst.site[i];
  const int ox = own % width, oy = own / width;
  constexpr int nx[4] = {1, -1, 0, 0};
  constexpr int ny[4] = {0, 0, 1, -1};
  for (int k = 0; k < 4; ++k) {
    const int xx = x + nx[k], yy = y + ny[k];
    if (xx < 0 || yy < 0 || xx >= width || yy >= height) continue;
    const size_t j = static_cast<size_t>(yy) * width + xx;
    if (obstacle[j]) continue;
    const int32_t other = obst.site[j];
    if (other < 0 || other == own) continue;
    const int sx = other % width, sy = other / width;
    if (std::max(std::abs(sx - ox), std::abs(sy - oy)) <= 1) continue;
    const double d_other = std::hypot(double(sx - x), double(sy - y));
    if (std::abs(d_other - obst.dist[i]) <= 1.0) return true;
  }
  return false;
}

}  // namespace

double voronoi_value(double d_o, double d_v, double alpha, double d_o_max) {
  if (!(d_o < d_o_max)) return 0.0;
  if (d_o <= 0.0) return 1.0;
  const double falloff = alpha / (alpha + d_o);
  const double ratio = std::isinf(d_v) ? 1.0 : d_v / (d_o + d_v);
  const double range = (d_o - d_o_max) * (d_o - d_o_max) / (d_o_max * d_o_max);
  return falloff * ratio * range;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---------------------------------------------------------------------------
namespace ref {

EdtResult edt(int width, int height, std::span<const uint8_t> is_site) {
  EdtResult out{width, height, std::vector<double>(is_site.size()),
                std::vector<int32_t>(is_site.size())};
  std::vector<int32_t> row(is_site.size());
  column_pass(width, height, is_site, row, 0, width);
  std::vector<double> f(width), d(width), z(width + 1);
  std::vector<int> arg(width), v(width);
  for (int y = 0; y < height; ++y) row_pass(width, y, row, out, f, d, arg, v, z);
  return out;
}

std::vector<CellClass> downsample(const IntermediateMap& map, double df, int out_w, int out_h) {
  std::vector<CellClass> out(static_cast<size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) out[static_cast<size_t>(y) * out_w + x] = downsample_cell(map, df, x, y);
  return out;
}

void fill_polygon(std::span<CellClass> cells, int width, int height, std::span<const Vec2> polygon,
                  CellClass value) {
  const Bounds b = polygon_cell_bounds(polygon, width, height);
  for (int y = b.y0; y <= b.y1; ++y)
    for (int x = b.x0; x <= b.x1; ++x)
      if (winding_number({double(x), double(y)}, polygon) != 0)
        cells[static_cast<size_t>(y) * width + x] = value;
}

std::vector<uint8_t> inflate(int width, int height, std::span<const uint8_t> blocked,
                             std::span<const uint8_t> inflatable, double radius) {
  std::vector<uint8_t> out(blocked.begin(), blocked.end());
  const auto offsets = disk_offsets(radius);
  // Scatter: stamp the disk around every blocked cell.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!blocked[static_cast<size_t>(y) * width + x]) continue;
      for (const Cell& o : offsets) {
        const int xx = x + o.x, yy = y + o.y;
        if (xx < 0 || yy < 0 || xx >= width || yy >= height) continue;
        const size_t j = static_cast<size_t>(yy) * width + xx;
        if (inflatable[j]) out[j] = 1;
      }
    }
  }
  return out;
}

VoronoiLayers voronoi_field(int width, int height, std::span<const uint8_t> obstacle, double alpha,
                            double d_o_max) {
  const size_t n = obstacle.size();
  VoronoiLayers out;
  const EdtResult obst = edt(width, height, obstacle);
  out.edge.assign(n, 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.edge[static_cast<size_t>(y) * width + x] = is_voronoi_edge(width, height, x, y, obst, obstacle);
  EdtResult edges = edt(width, height, out.edge);
  out.d_o = obst.dist;
  out.d_v = std::move(edges.dist);
  out.v.resize(n);
  for (size_t i = 0; i < n; ++i) out.v[i] = voronoi_value(out.d_o[i], out.d_v[i], alpha, d_o_max);
  return out;
}

}  // namespace ref

// ---------------------------------------------------------------------------
namespace par {

EdtResult edt(int width, int height, std::span<const uint8_t> is_site) {
  EdtResult out{width, height, std::vector<double>(is_site.size()),
                std::vector<int32_t>(is_site.size())};
  std::vector<int32_t> row(is_site.size());
  constexpr int kBlock = 64;
  const int blocks = (width + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < blocks; ++b)
    column_pass(width, height, is_site, row, b * kBlock, std::min(width, (b + 1) * kBlock));

#pragma omp parallel
  {
    std::vector<double> f(width), d(width), z(width + 1);
    std::vector<int> arg(width), v(width);
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) row_pass(width, y, row, out, f, d, arg, v, z);
  }
  return out;
}

std::vector<CellClass> downsample(const IntermediateMap& map, double df, int out_w, int out_h) {
  std::vector<CellClass> out(static_cast<size_t>(out_w) * out_h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) out[static_cast<size_t>(y) * out_w + x] = downsample_cell(map, df, x, y);
  return out;
}

void fill_polygon(std::span<CellClass> cells, int width, int height, std::span<const Vec2> polygon,
                  CellClass value) {
  const Bounds b = polygon_cell_bounds(polygon, width, height);
#pragma omp parallel for schedule(dynamic, 16)
  for (int y = b.y0; y <= b.y1; ++y)
    for (int x = b.x0; x <= b.x1; ++x)
      if (winding_number({double(x), double(y)}, polygon) != 0)
        cells[static_cast<size_t>(y) * width + x] = value;
}

std::vector<uint8_t> inflate(int width, int height, std::span<const uint8_t> blocked,
                             std::span<const uint8_t> inflatable, double radius) {
  std::vector<uint8_t> out(blocked.size());
  const auto offsets = disk_offsets(radius);
  // Gather: a cell is blocked if any stencil neighbour is.
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const size_t i = static_cast<size_t>(y) * width + x;
      uint8_t b = blocked[i];
      if (!b && inflatable[i]) {
        for (const Cell& o : offsets) {
          const int xx = x + o.x, yy = y + o.y;
          if (xx < 0 || yy < 0 || xx >= width || yy >= height) continue;
          if (blocked[static_cast<size_t>(yy) * width + xx]) {
            b = 1;
            break;
          }
        }
      }
      out[i] = b;
    }
  }
  return out;
}

VoronoiLayers voronoi_field(int width, int height, std::span<const uint8_t> obstacle, double alpha,
                            double d_o_max) {
  const size_t n = obstacle.size();
  VoronoiLayers out;
  const EdtResult obst = edt(width, height, obstacle);
  out.edge.assign(n, 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.edge[static_cast<size_t>(y) * width + x] = is_voronoi_edge(width, height, x, y, obst, obstacle);
  EdtResult edges = edt(width, height, out.edge);
  out.d_o = obst.dist;
  out.d_v = std::move(edges.dist);
  out.v.resize(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    out.v[i] = voronoi_value(out.d_o[i], out.d_v[i], alpha, d_o_max);
  return out;
}

}  // namespace par

}  // namespace offroad::kernels
