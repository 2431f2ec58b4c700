#include "offroad/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "offroad/io.hpp"
#include "offroad/memory.hpp"

namespace offroad {

using nlohmann::json;

namespace {

[[noreturn]] void reject(const std::string& msg) { throw PlanningError(ErrorKind::InvalidArgument, msg, "scenario"); }

std::string num(double v, int prec = 4) {
  if (std::isinf(v)) return "Inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

uint64_t mix(uint64_t seed, const std::string& id) {
  uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  for (unsigned char c : id) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

}  // namespace

const char* to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::AStar: return "ASTAR";
    case BenchMethod::Jps: return "JPS";
    case BenchMethod::Proposed: return "PROPOSED";
  }
  return "?";
}

BenchMethod bench_method_from_string(const std::string& s) {
  if (s == "ASTAR") return BenchMethod::AStar;
  if (s == "JPS") return BenchMethod::Jps;
  if (s == "PROPOSED") return BenchMethod::Proposed;
  reject("unknown method " + s);
}

BenchScenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  BenchScenario sc;
  try {
    if (!j.is_object()) reject("scenario must be an object");
    if (!j.contains("maps") || !j.at("maps").is_array() || j.at("maps").empty()) reject("scenario needs maps");
    for (const json& m : j.at("maps")) {
      BenchMapSpec spec;
      spec.id = m.at("id").get<std::string>();
      if (m.contains("synthetic")) {
        const json& s = m.at("synthetic");
        SynthOptions o;
        o.width = s.value("width", o.width);
        o.height = s.value("height", o.height);
        o.meters_per_pixel = s.value("meters_per_pixel", o.meters_per_pixel);
        o.seed = s.value("seed", o.seed);
        o.trails = s.value("trails", o.trails);
        o.obstacle_fraction = s.value("obstacle_fraction", o.obstacle_fraction);
        o.rivers = s.value("rivers", o.rivers);
        spec.synthetic = o;
      } else {
        auto resolve = [&](const std::string& p) {
          std::filesystem::path q(p);
          return q.is_relative() && !base_dir.empty() ? base_dir / q : q;
        };
        spec.cache = resolve(m.at("cache").get<std::string>());
        if (!std::filesystem::exists(spec.cache)) reject("map " + spec.id + ": missing file " + spec.cache.string());
        if (m.contains("trails")) {
          spec.trails = resolve(m.at("trails").get<std::string>());
          if (!std::filesystem::exists(spec.trails))
            reject("map " + spec.id + ": missing file " + spec.trails.string());
        }
      }
      sc.maps.push_back(std::move(spec));
    }
    sc.pairs = j.value("pairs", sc.pairs);
    sc.min_displacement_m = j.value("min_displacement_m", sc.min_displacement_m);
    if (j.contains("methods")) {
      sc.methods.clear();
      for (const json& m : j.at("methods")) sc.methods.push_back(bench_method_from_string(m.get<std::string>()));
    }
    sc.with_road_network = j.value("with_road_network", sc.with_road_network);
    sc.without_road_network = j.value("without_road_network", sc.without_road_network);
    sc.seed = j.value("seed", sc.seed);
    sc.timeout_s = j.value("timeout_s", sc.timeout_s);
    sc.vehicle_width_m = j.value("vehicle_width_m", sc.vehicle_width_m);
  } catch (const json::exception& e) {
    reject(std::string("malformed scenario: ") + e.what());
  }
  if (sc.min_displacement_m < 0 || !(sc.timeout_s > 0)) reject("scenario values out of range");
  return sc;
}

std::vector<Endpoints> generate_pairs(const IntermediateMap& map, size_t count, double min_px, uint64_t seed,
                                      double clearance_px) {
  std::vector<Endpoints> out;
  if (count == 0) return out;
  const ClearanceMap grid(map, clearance_px);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ux(0, map.width() - 1), uy(0, map.height() - 1);
  auto draw = [&]() -> std::optional<Cell> {
    for (int k = 0; k < 100000; ++k) {
      const Cell c{ux(rng), uy(rng)};
      if (map.at(c) == CellClass::Free && grid.passable(c)) return c;
    }
    return std::nullopt;
  };
  const size_t max_attempts = 1000 * count + 10000;
  for (size_t a = 0; a < max_attempts && out.size() < count; ++a) {
    const auto s = draw(), t = draw();
    if (!s || !t) break;
    if (std::hypot(double(s->x - t->x), double(s->y - t->y)) >= min_px) out.push_back({*s, *t});
  }
  if (out.size() < count) throw PlanningError(ErrorKind::InvalidArgument, "map too small for the requested pairs", "scenario");
  return out;
}

PlanRequest bench_request(BenchMethod method, bool road_network, const IntermediateMap& map, const Endpoints& e,
                          double vehicle_width_m, double timeout_s) {
  PlanRequest r;
  const GeoPoint s = pixel_to_geo(e.start.x, e.start.y, map.transform());
  const GeoPoint t = pixel_to_geo(e.target.x, e.target.y, map.transform());
  r.start = {s.lon, s.lat, {}};
  r.target = {t.lon, t.lat, {}};
  r.mode = road_network ? PlanMode::TrailPreferred : PlanMode::Direct;
  r.planner = method == BenchMethod::AStar ? GridPlanner::AStar : GridPlanner::Jps;
  r.params.vehicle_width_m = vehicle_width_m;
  r.params.time_budget_s = timeout_s;
  if (method != BenchMethod::Proposed) r.params.simplify = r.params.repair = r.params.smooth = false;
  return r;
}

IntermediateMap load_bench_map(const BenchMapSpec& spec) {
  if (spec.synthetic) return synth_map(*spec.synthetic);
  IntermediateMap m = io::load_map_cache(spec.cache);
  if (!spec.trails.empty()) {
    const auto features = io::load_geojson(spec.trails);
    RasterizeOptions ro;
    ro.geographic = true;
    m = rasterize_features(m, features, ro);
  }
  return m;
}

BenchSummary summarize(const std::vector<BenchRun>& runs) {
  BenchSummary s;
  if (runs.empty()) return s;
  s.method = runs.front().method;
  s.map = runs.front().map;
  s.road_network = runs.front().road_network;
  s.runs = runs.size();
  double t = 0, c = 0, m = 0;
  size_t finite_t = 0, finite_m = 0;
  for (const BenchRun& r : runs) {
    if (std::isinf(r.time_s)) ++s.timeouts;
    s.peak_memory_gb = std::max(s.peak_memory_gb, r.memory_gb);
    if (!r.success) continue;
    ++s.successes;
    t += r.time_s;
    c += r.csd;
    if (std::isfinite(r.mod)) {
      m += r.mod;
      ++finite_m;
    }
    ++finite_t;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.mean_time_s = finite_t ? t / finite_t : (s.timeouts ? std::numeric_limits<double>::infinity() : nan);
  s.mean_csd = finite_t ? c / finite_t : nan;
  s.mean_mod = finite_m ? m / finite_m : (finite_t ? std::numeric_limits<double>::infinity() : nan);
  return s;
}

BenchReport run_benchmark(const BenchScenario& sc, const BenchProgress& progress) {
  BenchReport rep;
  if (sc.pairs == 0 || sc.methods.empty()) return rep;
  std::vector<bool> modes;
  if (sc.with_road_network) modes.push_back(true);
  if (sc.without_road_network) modes.push_back(false);

  for (const BenchMapSpec& spec : sc.maps) {
    const auto t0 = std::chrono::steady_clock::now();
    PlanningContext ctx(load_bench_map(spec));
    const double setup_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const IntermediateMap& map = ctx.base_map();
    const double mpp = map.meters_per_pixel();
    const auto pairs = generate_pairs(map, sc.pairs, sc.min_displacement_m / mpp, mix(sc.seed, spec.id),
                                      0.5 * sc.vehicle_width_m / mpp);

    for (bool rn : modes) {
      for (BenchMethod method : sc.methods) {
        std::vector<BenchRun> group;
        for (size_t i = 0; i < pairs.size(); ++i) {
          BenchRun run;
          run.method = method;
          run.map = spec.id;
          run.road_network = rn;
          run.pair = i;
          const PlanRequest req = bench_request(method, rn, map, pairs[i], sc.vehicle_width_m, sc.timeout_s);
          const long before = current_rss_bytes();
          try {
            const PlanResult res = ctx.plan(req);
            double ms = res.metrics.total_ms;
            for (const auto& [stage, v] : res.metrics.stage_ms)
              if (stage == "metrics") ms -= v;
            run.time_s = ms / 1000.0;
            run.memory_gb = std::max(0L, res.metrics.peak_memory_bytes - before) / 1e9;
            run.csd = res.metrics.csd;
            run.mod = res.metrics.mod;
            run.success = true;
            if (run.time_s > sc.timeout_s) {
              run.time_s = std::numeric_limits<double>::infinity();
              run.success = false;
              run.error = "Timeout";
            }
          } catch (const PlanningError& e) {
            run.memory_gb = std::max(0L, peak_rss_bytes() - before) / 1e9;
            run.error = to_string(e.kind());
            if (e.kind() == ErrorKind::Timeout) run.time_s = std::numeric_limits<double>::infinity();
          }
          if (progress) progress(run);
          group.push_back(run);
        }
        BenchSummary s = summarize(group);
        s.setup_s = setup_s;
        rep.summary.push_back(s);
        rep.runs.insert(rep.runs.end(), group.begin(), group.end());
      }
    }
  }
  return rep;
}

std::string runs_csv(const std::vector<BenchRun>& runs) {
  std::ostringstream os;
  os << "method,map,road_network,time_s,memory_gb,csd,mod,success,pair,error\n";
  for (const BenchRun& r : runs)
    os << to_string(r.method) << ',' << r.map << ',' << (r.road_network ? "true" : "false") << ','
       << num(r.time_s, 6) << ',' << num(r.memory_gb, 6) << ',' << num(r.csd, 6) << ',' << num(r.mod, 6) << ','
       << (r.success ? "true" : "false") << ',' << r.pair << ',' << r.error << '\n';
  return os.str();
}

std::string summary_csv(const std::vector<BenchSummary>& rows) {
  std::ostringstream os;
  os << "method,map,road_network,time_s,memory_gb,csd,mod,success,runs,timeouts,setup_s\n";
  for (const BenchSummary& s : rows)
    os << to_string(s.method) << ',' << s.map << ',' << (s.road_network ? "true" : "false") << ','
       << num(s.mean_time_s, 6) << ',' << num(s.peak_memory_gb, 6) << ',' << num(s.mean_csd, 6) << ','
       << num(s.mean_mod, 6) << ',' << num(s.success_rate(), 4) << ',' << s.runs << ',' << s.timeouts << ','
       << num(s.setup_s, 3) << '\n';
  return os.str();
}

std::string summary_table(const std::vector<BenchSummary>& rows) {
  const std::vector<std::string> head{"method", "map", "road network", "time (s)", "memory (GB)",
                                      "CSD (1/m)", "MOD (m)", "success", "setup (s)"};
  std::vector<std::vector<std::string>> cells{head};
  for (const BenchSummary& s : rows)
    cells.push_back({to_string(s.method), s.map, s.road_network ? "with" : "without", num(s.mean_time_s, 3),
                     num(s.peak_memory_gb, 3), num(s.mean_csd, 4), num(s.mean_mod, 2),
                     std::to_string(s.successes) + "/" + std::to_string(s.runs), num(s.setup_s, 2)});
  std::vector<size_t> w(head.size(), 0);
  for (const auto& row : cells)
    for (size_t c = 0; c < row.size(); ++c) w[c] = std::max(w[c], row[c].size());
  std::ostringstream os;
  for (size_t r = 0; r < cells.size(); ++r) {
    for (size_t c = 0; c < cells[r].size(); ++c)
      os << (c ? "  " : "") << std::left << std::setw(static_cast<int>(w[c])) << cells[r][c];
    os << '\n';
    if (r == 0) {
      size_t total = 0;
      for (size_t x : w) total += x;
      os << std::string(total + 2 * (w.size() - 1), '-') << '\n';
    }
  }
  return os.str();
}

void write_report(const BenchReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_file(dir / "runs.csv", runs_csv(report.runs));
  io::write_file(dir / "summary.csv", summary_csv(report.summary));
  io::write_file(dir / "summary.txt", summary_table(report.summary));
}

}  // namespace offroad
