#include <random>

#include <benchmark/benchmark.h>

#include "offroad/kernels.hpp"

using namespace offroad;
namespace K = offroad::kernels;

namespace {

std::vector<uint8_t> mask(int n, double p) {
  std::mt19937_64 rng(42);
  std::bernoulli_distribution b(p);
  std::vector<uint8_t> m(static_cast<size_t>(n) * n);
  for (auto& v : m) v = b(rng);
  return m;
}

IntermediateMap scene(int n) {
  const auto m = mask(n, 0.05);
  std::vector<CellClass> cells(m.size());
  for (size_t i = 0; i < m.size(); ++i) cells[i] = m[i] ? CellClass::Obstacle : CellClass::Free;
  return IntermediateMap(n, n, std::move(cells), GeoTransform{});
}

std::vector<Vec2> star(int n) {
  std::vector<Vec2> p;
  for (int i = 0; i < 40; ++i) {
    const double a = 2 * 3.141592653589793 * i / 40, r = (i % 2 ? 0.45 : 0.2) * n;
    p.push_back({0.5 * n + r * std::cos(a), 0.5 * n + r * std::sin(a)});
  }
  return p;
}

template <auto Fn>
void BM_edt(benchmark::State& st) {
  const int n = int(st.range(0));
  const auto sites = mask(n, 0.01);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(n, n, sites));
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n);
}

template <auto Fn>
void BM_voronoi(benchmark::State& st) {
  const int n = int(st.range(0));
  const auto obst = mask(n, 0.005);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(n, n, obst, 10.0, 30.0));
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n);
}

template <auto Fn>
void BM_inflate(benchmark::State& st) {
  const int n = int(st.range(0));
  const auto blocked = mask(n, 0.02);
  const std::vector<uint8_t> inflatable(blocked.size(), 1);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(n, n, blocked, inflatable, 3.0));
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n);
}

template <auto Fn>
void BM_downsample(benchmark::State& st) {
  const int n = int(st.range(0));
  const auto m = scene(n);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(m, 8.0, n / 8, n / 8));
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n);
}

template <auto Fn>
void BM_fill_polygon(benchmark::State& st) {
  const int n = int(st.range(0));
  const auto poly = star(n);
  std::vector<CellClass> cells(static_cast<size_t>(n) * n);
  for (auto _ : st) {
    Fn(cells, n, n, poly, CellClass::Restricted);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n);
}

}  // namespace

BENCHMARK(BM_edt<K::ref::edt>)->Name("edt/ref")->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_edt<K::par::edt>)->Name("edt/par")->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_voronoi<K::ref::voronoi_field>)->Name("voronoi/ref")->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_voronoi<K::par::voronoi_field>)->Name("voronoi/par")->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_inflate<K::ref::inflate>)->Name("inflate/ref")->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_inflate<K::par::inflate>)->Name("inflate/par")->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_downsample<K::ref::downsample>)->Name("downsample/ref")->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_downsample<K::par::downsample>)->Name("downsample/par")->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fill_polygon<K::ref::fill_polygon>)->Name("fill_polygon/ref")->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fill_polygon<K::par::fill_polygon>)->Name("fill_polygon/par")->Arg(2048)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
