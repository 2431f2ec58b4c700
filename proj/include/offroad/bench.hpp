#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "offroad/pipeline.hpp"
#include "offroad/synth.hpp"

namespace offroad {

enum class BenchMethod { AStar, Jps, Proposed };

const char* to_string(BenchMethod m);
BenchMethod bench_method_from_string(const std::string& s);

/// A map is either a cache file (plus optional trail GeoJSON) or a synthetic scene.
struct BenchMapSpec {
  std::string id;
  std::filesystem::path cache;
  std::filesystem::path trails;
  std::optional<SynthOptions> synthetic;
};

struct BenchScenario {
  std::vector<BenchMapSpec> maps;
  size_t pairs = 100;
  double min_displacement_m = 1000.0;
  std::vector<BenchMethod> methods{BenchMethod::AStar, BenchMethod::Jps, BenchMethod::Proposed};
  bool with_road_network = true;
  bool without_road_network = true;
  uint64_t seed = 1;
  /// Runs longer than this count as Inf.
  double timeout_s = 10.0;
  double vehicle_width_m = 2.0;
};

/// Parses a scenario; relative paths resolve against `base_dir`. Missing map
/// files are rejected.
BenchScenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct BenchRun {
  BenchMethod method = BenchMethod::Proposed;
  std::string map;
  bool road_network = true;
  size_t pair = 0;
  double time_s = 0.0;  // +inf on timeout
  double memory_gb = 0.0;
  double csd = 0.0;
  double mod = 0.0;
  bool success = false;
  std::string error;
};

struct BenchSummary {
  BenchMethod method = BenchMethod::Proposed;
  std::string map;
  bool road_network = true;
  size_t runs = 0;
  size_t successes = 0;
  size_t timeouts = 0;
  double mean_time_s = 0.0;  // +inf when every run timed out
  double peak_memory_gb = 0.0;
  double mean_csd = 0.0;
  double mean_mod = 0.0;
  double setup_s = 0.0;  // map load and trail index build
  double success_rate() const { return runs ? double(successes) / runs : 0.0; }
};

struct BenchReport {
  std::vector<BenchRun> runs;
  std::vector<BenchSummary> summary;
};

struct Endpoints {
  Cell start;
  Cell target;
};

/// Reproducible random pairs of free cells at least `min_px` apart, all
/// passable under the vehicle clearance.
std::vector<Endpoints> generate_pairs(const IntermediateMap& map, size_t count, double min_px, uint64_t seed,
                                      double clearance_px = 0.0);

/// Request used for one method; the baselines stop after the grid search.
PlanRequest bench_request(BenchMethod method, bool road_network, const IntermediateMap& map, const Endpoints& e,
                          double vehicle_width_m, double timeout_s);

IntermediateMap load_bench_map(const BenchMapSpec& spec);

using BenchProgress = std::function<void(const BenchRun&)>;
BenchReport run_benchmark(const BenchScenario& scenario, const BenchProgress& progress = {});

/// Summary over the runs of one (method, map, road network) group.
BenchSummary summarize(const std::vector<BenchRun>& runs);

std::string runs_csv(const std::vector<BenchRun>& runs);
std::string summary_csv(const std::vector<BenchSummary>& rows);
std::string summary_table(const std::vector<BenchSummary>& rows);

/// Writes runs.csv, summary.csv and summary.txt into `dir`.
void write_report(const BenchReport& report, const std::filesystem::path& dir);

}  // namespace offroad
