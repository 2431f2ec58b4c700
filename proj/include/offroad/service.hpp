#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "offroad/pipeline.hpp"

namespace httplib {
class Server;
}

namespace offroad {

enum class LogLevel { Error, Warn, Info, Debug };

/// Reads PLANNER_LOG (error, warn, info, debug); defaults to warn.
LogLevel log_level_from_env();
void log_line(LogLevel level, const std::string& msg);

struct ServiceOptions {
  std::string map_id = "default";
  double plan_cap_s = 30.0;
  /// Session overlays are saved here after every change and loaded on start.
  std::filesystem::path state_file;
  /// Largest Voronoi window served in one response, in cells.
  size_t max_field_cells = 16'000'000;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::multimap<std::string, std::string>;

struct StoredArea {
  std::string id;
  AreaOverlay overlay;
};

/// Transport-independent request handling; `mount` wires it into httplib.
class PlannerService {
 public:
  PlannerService(std::shared_ptr<PlanningContext> ctx, ServiceOptions opts = {});

  HttpResponse handle(const std::string& method, const std::string& path, const QueryParams& query,
                      const std::string& body, const std::string& session = "default");

  void mount(httplib::Server& server);

  std::vector<StoredArea> areas(const std::string& session);

 private:
  struct Session {
    std::mutex mu;
    uint64_t next_id = 1;
    std::vector<StoredArea> areas;
    std::optional<PlanRequest> last_request;
    std::optional<Pose> last_t_bar;
  };

  Session& session(const std::string& id);
  HttpResponse plan(const std::string& body, Session& s);
  HttpResponse add_area(const std::string& body, Session& s);
  HttpResponse delete_area(const std::string& id, Session& s);
  HttpResponse list_areas(Session& s);
  HttpResponse meta();
  HttpResponse tile(const QueryParams& q, Session& s);
  HttpResponse distance_pgm(const QueryParams& q, Session& s);
  HttpResponse voronoi_pgm(const QueryParams& q, Session& s);
  std::vector<AreaOverlay> overlays_of(Session& s);
  void save_state();
  void load_state();

  std::shared_ptr<PlanningContext> ctx_;
  ServiceOptions opts_;
  std::mutex sessions_mu_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

/// Blocks serving on host:port.
bool serve(PlannerService& service, const std::string& host, int port);

}  // namespace offroad
