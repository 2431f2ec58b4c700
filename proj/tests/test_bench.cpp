#include <fstream>
#include <unistd.h>

#include "doctest.h"

#include "offroad/bench.hpp"
#include "offroad/io.hpp"

using namespace offroad;
using nlohmann::json;

namespace {

BenchScenario small_scenario() {
  BenchScenario sc;
  SynthOptions so;
  so.width = 300;
  so.height = 300;
  so.seed = 3;
  sc.maps.push_back({"synth", {}, {}, so});
  sc.pairs = 3;
  sc.min_displacement_m = 120;
  sc.seed = 5;
  return sc;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("zero pairs produce an empty report") {
  BenchScenario sc = small_scenario();
  sc.pairs = 0;
  const auto rep = run_benchmark(sc);
  CHECK(rep.runs.empty());
  CHECK(rep.summary.empty());
  CHECK(generate_pairs(IntermediateMap(10, 10), 0, 5, 1).empty());
}

TEST_CASE("pairs are reproducible, free and far enough apart") {
  SynthOptions so;
  so.width = 300;
  so.height = 300;
  const auto m = synth_map(so);
  const auto a = generate_pairs(m, 20, 100, 7, 1.0);
  const auto b = generate_pairs(m, 20, 100, 7, 1.0);
  const auto c = generate_pairs(m, 20, 100, 8, 1.0);
  REQUIRE(a.size() == 20);
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start == b[i].start);
    CHECK(a[i].target == b[i].target);
    differs |= !(a[i].start == c[i].start);
    CHECK(m.at(a[i].start) == CellClass::Free);
    CHECK(m.at(a[i].target) == CellClass::Free);
    CHECK(distance(a[i].start.center(), a[i].target.center()) >= 100);
  }
  CHECK(differs);
  CHECK_THROWS_AS(generate_pairs(IntermediateMap(10, 10), 5, 100, 1), PlanningError);
}

TEST_CASE("scenario parsing") {
  const auto dir = std::filesystem::temp_directory_path() / ("offroad_bench_" + std::to_string(getpid()));
  std::filesystem::create_directories(dir);
  io::save_map_cache(IntermediateMap(20, 20), dir / "m.map");
  const json good = {{"maps", {{{"id", "a"}, {"cache", "m.map"}}, {{"id", "s"}, {"synthetic", {{"width", 64}}}}}},
                     {"pairs", 4},
                     {"methods", {"ASTAR", "PROPOSED"}},
                     {"timeout_s", 2.5}};
  const auto sc = scenario_from_json(good, dir);
  REQUIRE(sc.maps.size() == 2);
  CHECK(sc.maps[0].cache == dir / "m.map");
  CHECK(sc.maps[1].synthetic->width == 64);
  CHECK(sc.pairs == 4);
  CHECK(sc.methods == std::vector<BenchMethod>{BenchMethod::AStar, BenchMethod::Proposed});
  CHECK(sc.timeout_s == 2.5);

  json missing = good;
  missing["maps"][0]["cache"] = "nope.map";
  CHECK_THROWS_AS(scenario_from_json(missing, dir), PlanningError);
  CHECK_THROWS_AS(scenario_from_json(json{{"maps", json::array()}}, dir), PlanningError);
  json bad_timeout = good;
  bad_timeout["timeout_s"] = 0;
  CHECK_THROWS_AS(scenario_from_json(bad_timeout, dir), PlanningError);
  json bad_method = good;
  bad_method["methods"] = {"RRT"};
  CHECK_THROWS_AS(scenario_from_json(bad_method, dir), PlanningError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("small benchmark runs every method and mode") {
  const auto sc = small_scenario();
  size_t seen = 0;
  const auto rep = run_benchmark(sc, [&](const BenchRun&) { ++seen; });
  CHECK(rep.runs.size() == 3 * 3 * 2);
  CHECK(seen == rep.runs.size());
  CHECK(rep.summary.size() == 6);
  for (const auto& r : rep.runs) {
    if (!r.success) continue;
    CHECK(r.time_s >= 0);
    CHECK(std::isfinite(r.time_s));
    CHECK(r.csd >= 0);
  }
  for (const auto& s : rep.summary) CHECK(s.runs == 3);

  const std::string csv = runs_csv(rep.runs);
  CHECK(csv.rfind("method,map,road_network,time_s,memory_gb,csd,mod,success,pair,error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == long(rep.runs.size()) + 1);
  CHECK(summary_csv(rep.summary).rfind("method,map,road_network,time_s", 0) == 0);
  CHECK(summary_table(rep.summary).find("PROPOSED") != std::string::npos);
}

TEST_CASE("timed out runs count as Inf") {
  BenchScenario sc = small_scenario();
  sc.timeout_s = 1e-9;
  sc.methods = {BenchMethod::Proposed};
  sc.with_road_network = false;
  const auto rep = run_benchmark(sc);
  REQUIRE(rep.summary.size() == 1);
  for (const auto& r : rep.runs) {
    CHECK_FALSE(r.success);
    CHECK(std::isinf(r.time_s));
  }
  CHECK(rep.summary[0].timeouts == 3);
  CHECK(std::isinf(rep.summary[0].mean_time_s));
  CHECK(summary_csv(rep.summary).find("Inf") != std::string::npos);
}

TEST_CASE("summary averages successful runs") {
  std::vector<BenchRun> runs(3);
  runs[0] = {BenchMethod::Jps, "m", true, 0, 1.0, 0.1, 0.2, 3.0, true, ""};
  runs[1] = {BenchMethod::Jps, "m", true, 1, 3.0, 0.3, 0.4, std::numeric_limits<double>::infinity(), true, ""};
  runs[2] = {BenchMethod::Jps, "m", true, 2, std::numeric_limits<double>::infinity(), 0.5, 0, 0, false, "Timeout"};
  const auto s = summarize(runs);
  CHECK(s.runs == 3);
  CHECK(s.successes == 2);
  CHECK(s.timeouts == 1);
  CHECK(s.mean_time_s == 2.0);
  CHECK(s.mean_csd == doctest::Approx(0.3));
  CHECK(s.mean_mod == 3.0);
  CHECK(s.peak_memory_gb == 0.5);
}

TEST_CASE("report files") {
  const auto dir = std::filesystem::temp_directory_path() / ("offroad_report_" + std::to_string(getpid()));
  BenchReport rep;
  rep.runs.push_back({});
  rep.summary.push_back(summarize(rep.runs));
  write_report(rep, dir);
  for (const char* f : {"runs.csv", "summary.csv", "summary.txt"}) CHECK(std::filesystem::exists(dir / f));
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
