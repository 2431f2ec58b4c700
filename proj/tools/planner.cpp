#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "offroad/bench.hpp"
#include "offroad/io.hpp"
#include "offroad/json_io.hpp"
#include "offroad/pipeline.hpp"
#include "offroad/service.hpp"
#include "offroad/synth.hpp"

using namespace offroad;
using nlohmann::json;

namespace {

IntermediateMap load_map(const std::string& cache, const std::string& trails) {
  IntermediateMap m = io::load_map_cache(cache);
  if (!trails.empty()) {
    RasterizeOptions ro;
    ro.geographic = true;
    m = rasterize_features(m, io::load_geojson(trails), ro);
  }
  return m;
}

PlanEndpoint parse_lonlat(const std::string& s) {
  std::istringstream is(s);
  PlanEndpoint e;
  char comma = 0;
  if (!(is >> e.lon >> comma >> e.lat) || comma != ',')
    throw PlanningError(ErrorKind::InvalidArgument, "expected lon,lat but got '" + s + "'");
  double h = 0;
  if (is >> comma >> h) e.heading = h;
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-road global path planner"};
  app.require_subcommand(1);

  std::string map_path, trails_path, host = "0.0.0.0", state_file, map_id = "default";
  int port = 8080;
  double df = 8.0;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  serve_cmd->add_option("--map", map_path, "Map cache (.ofrm)")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--trails", trails_path, "Trail GeoJSON burned over the map")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port, "Port");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--state", state_file, "Session overlay snapshot file");
  serve_cmd->add_option("--map-id", map_id, "Map identifier accepted in requests");
  serve_cmd->add_option("--df", df, "Trail downsampling factor");

  std::string start, target, out_path, result_path, planner = "JPS";
  bool direct = false;
  auto* plan_cmd = app.add_subcommand("plan", "Plan one path and write it as GeoJSON");
  plan_cmd->add_option("--map", map_path, "Map cache (.ofrm)")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--trails", trails_path, "Trail GeoJSON")->check(CLI::ExistingFile);
  plan_cmd->add_option("--start", start, "lon,lat[,heading]")->required();
  plan_cmd->add_option("--target", target, "lon,lat[,heading]")->required();
  plan_cmd->add_option("--out", out_path, "GeoJSON output")->required();
  plan_cmd->add_option("--result", result_path, "Full result JSON output");
  plan_cmd->add_option("--planner", planner, "JPS or ASTAR")->check(CLI::IsMember({"JPS", "ASTAR"}));
  plan_cmd->add_flag("--direct", direct, "Ignore the trail network");
  plan_cmd->add_option("--df", df, "Trail downsampling factor");

  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks");
  bench_cmd->require_subcommand(1);
  std::string scenario_path, bench_out;
  auto* bench_run = bench_cmd->add_subcommand("run", "Run a benchmark scenario");
  bench_run->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  bench_run->add_option("--out", bench_out, "Output directory")->required();

  SynthOptions so;
  std::string synth_out;
  bool no_trails = false;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic map cache");
  synth_cmd->add_option("--width", so.width);
  synth_cmd->add_option("--height", so.height);
  synth_cmd->add_option("--mpp", so.meters_per_pixel, "Meters per pixel");
  synth_cmd->add_option("--seed", so.seed);
  synth_cmd->add_option("--obstacles", so.obstacle_fraction, "Obstacle area fraction");
  synth_cmd->add_option("--rivers", so.rivers);
  synth_cmd->add_flag("--no-trails", no_trails);
  synth_cmd->add_option("--out", synth_out, "Output .ofrm")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) {
      auto ctx = std::make_shared<PlanningContext>(load_map(map_path, trails_path), df);
      ServiceOptions opts;
      opts.map_id = map_id;
      opts.state_file = state_file;
      PlannerService service(ctx, opts);
      return serve(service, host, port) ? 0 : 1;
    }
    if (*plan_cmd) {
      PlanningContext ctx(load_map(map_path, trails_path), df);
      PlanRequest req;
      req.start = parse_lonlat(start);
      req.target = parse_lonlat(target);
      req.mode = direct ? PlanMode::Direct : PlanMode::TrailPreferred;
      req.planner = planner == "ASTAR" ? GridPlanner::AStar : GridPlanner::Jps;
      const PlanResult res = ctx.plan(req);
      io::write_file(out_path, to_geojson(res).dump(2));
      if (!result_path.empty()) io::write_file(result_path, to_json(res).dump(2));
      std::printf("length %.1f m, %zu segments, max curvature %.4f 1/m, CSD %.4f, MOD %.2f m, %.0f ms\n",
                  res.metrics.length_m, res.segments.size(), res.metrics.max_curvature, res.metrics.csd,
                  res.metrics.mod, res.metrics.total_ms);
      return 0;
    }
    if (*bench_run) {
      const std::filesystem::path sp(scenario_path);
      const BenchScenario sc = scenario_from_json(json::parse(io::read_file(sp)), sp.parent_path());
      const BenchReport rep = run_benchmark(sc, [](const BenchRun& r) {
        std::fprintf(stderr, "%s %s %s pair %zu: %s\n", to_string(r.method), r.map.c_str(),
                     r.road_network ? "with" : "without", r.pair, r.success ? "ok" : r.error.c_str());
      });
      write_report(rep, bench_out);
      std::cout << summary_table(rep.summary);
      return 0;
    }
    if (*synth_cmd) {
      so.trails = !no_trails;
      io::save_map_cache(synth_map(so), synth_out);
      return 0;
    }
  } catch (const PlanningError& e) {
    std::fprintf(stderr, "error: %s", e.what());
    if (!e.stage().empty()) std::fprintf(stderr, " (stage %s)", e.stage().c_str());
    std::fprintf(stderr, "\n");
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
