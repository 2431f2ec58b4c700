#include "offroad/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>

#include "httplib.h"

#include "offroad/io.hpp"
#include "offroad/json_io.hpp"
#include "offroad/smooth.hpp"
#include "offroad/trails.hpp"

namespace offroad {

using nlohmann::json;

LogLevel log_level_from_env() {
  const char* v = std::getenv("PLANNER_LOG");
  const std::string s = v ? v : "";
  if (s == "error") return LogLevel::Error;
  if (s == "info") return LogLevel::Info;
  if (s == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

void log_line(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = log_level_from_env();
  if (level > threshold) return;
  static std::mutex mu;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard lock(mu);
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

namespace {

HttpResponse json_response(int status, const json& j) { return {status, j.dump(), "application/json"}; }

HttpResponse error_response(int status, const std::string& msg) { return json_response(status, {{"error", msg}}); }

int status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnsupportedGeometry:
    case ErrorKind::DegeneratePolygon: return 400;
    case ErrorKind::NoTrailNearStart:
    case ErrorKind::NoTrailPath:
    case ErrorKind::NoGridPath:
    case ErrorKind::SliceExhausted: return 422;
    case ErrorKind::Timeout: return 504;
    case ErrorKind::Io: return 500;
  }
  return 500;
}

std::optional<long> int_param(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') throw PlanningError(ErrorKind::InvalidArgument, key + " must be an integer");
  return v;
}

std::optional<double> real_param(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0' || !std::isfinite(v))
    throw PlanningError(ErrorKind::InvalidArgument, key + " must be a number");
  return v;
}

}  // namespace

PlannerService::PlannerService(std::shared_ptr<PlanningContext> ctx, ServiceOptions opts)
    : ctx_(std::move(ctx)), opts_(std::move(opts)) {
  if (!opts_.state_file.empty() && std::filesystem::exists(opts_.state_file)) load_state();
}

PlannerService::Session& PlannerService::session(const std::string& id) {
  std::lock_guard lock(sessions_mu_);
  auto& slot = sessions_[id];
  if (!slot) slot = std::make_unique<Session>();
  return *slot;
}

std::vector<StoredArea> PlannerService::areas(const std::string& id) {
  Session& s = session(id);
  std::lock_guard lock(s.mu);
  return s.areas;
}

std::vector<AreaOverlay> PlannerService::overlays_of(Session& s) {
  std::lock_guard lock(s.mu);
  std::vector<AreaOverlay> out;
  for (const auto& a : s.areas) out.push_back(a.overlay);
  return out;
}

HttpResponse PlannerService::handle(const std::string& method, const std::string& path, const QueryParams& query,
                                    const std::string& body, const std::string& session_id) {
  Session& s = session(session_id.empty() ? "default" : session_id);
  try {
    if (method == "POST" && path == "/plan") return plan(body, s);
    if (method == "POST" && path == "/areas") return add_area(body, s);
    if (method == "GET" && path == "/areas") return list_areas(s);
    if (method == "DELETE" && path.rfind("/areas/", 0) == 0) return delete_area(path.substr(7), s);
    if (method == "GET" && path == "/map/meta") return meta();
    if (method == "GET" && path == "/map/tile") return tile(query, s);
    if (method == "GET" && path == "/fields/distance.pgm") return distance_pgm(query, s);
    if (method == "GET" && path == "/fields/voronoi.pgm") return voronoi_pgm(query, s);
    if (method == "GET" && path == "/health") return json_response(200, {{"status", "ok"}});
    return error_response(404, "no route for " + method + " " + path);
  } catch (const PlanningError& e) {
    return json_response(status_for(e.kind()), error_json(e));
  } catch (const std::exception& e) {
    log_line(LogLevel::Error, std::string("internal error: ") + e.what());
    return error_response(500, e.what());
  }
}

HttpResponse PlannerService::plan(const std::string& body, Session& s) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    return error_response(400, std::string("invalid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("map")) {
    if (!j.at("map").is_string()) return error_response(400, "map must be a string");
    if (j.at("map").get<std::string>() != opts_.map_id) return error_response(404, "unknown map " + j.at("map").dump());
  }
  PlanRequest req = plan_request_from_json(j, ctx_->base_map().transform());
  auto session_overlays = overlays_of(s);
  req.overlays.insert(req.overlays.begin(), session_overlays.begin(), session_overlays.end());
  const double cap = opts_.plan_cap_s;
  req.params.time_budget_s = req.params.time_budget_s > 0 ? std::min(req.params.time_budget_s, cap) : cap;

  const auto t0 = std::chrono::steady_clock::now();
  const PlanResult res = ctx_->plan(req);
  const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (took > cap) return json_response(504, {{"error", "planning exceeded the server time cap"}, {"kind", "Timeout"}});
  {
    std::lock_guard lock(s.mu);
    s.last_request = req;
    s.last_t_bar = res.t_bar;
  }
  return json_response(200, to_json(res));
}

HttpResponse PlannerService::add_area(const std::string& body, Session& s) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    return error_response(400, std::string("invalid JSON: ") + e.what());
  }
  const AreaOverlay o = overlay_from_json(j, ctx_->base_map().transform());
  std::string id;
  {
    std::lock_guard lock(s.mu);
    id = "a" + std::to_string(s.next_id++);
    s.areas.push_back({id, o});
  }
  save_state();
  return json_response(201, {{"id", id}});
}

HttpResponse PlannerService::delete_area(const std::string& id, Session& s) {
  {
    std::lock_guard lock(s.mu);
    auto it = std::find_if(s.areas.begin(), s.areas.end(), [&](const StoredArea& a) { return a.id == id; });
    if (it == s.areas.end()) return error_response(404, "unknown area " + id);
    s.areas.erase(it);
  }
  save_state();
  return {204, "", "text/plain"};
}

HttpResponse PlannerService::list_areas(Session& s) {
  std::lock_guard lock(s.mu);
  json arr = json::array();
  for (const auto& a : s.areas) {
    json e = to_json(a.overlay, ctx_->base_map().transform());
    e["id"] = a.id;
    arr.push_back(e);
  }
  return json_response(200, {{"areas", arr}});
}

HttpResponse PlannerService::meta() {
  const IntermediateMap& m = ctx_->base_map();
  const GeoTransform& t = m.transform();
  return json_response(200, {{"map", opts_.map_id},
                             {"width", m.width()},
                             {"height", m.height()},
                             {"meters_per_pixel", m.meters_per_pixel()},
                             {"trail_points", ctx_->base_net().points().size()},
                             {"downsample_factor", ctx_->df()},
                             {"transform",
                              {{"x_origin", t.x_origin},
                               {"y_origin", t.y_origin},
                               {"pixel_width", t.pixel_width},
                               {"pixel_height", t.pixel_height},
                               {"crs", t.crs_id}}}});
}

HttpResponse PlannerService::tile(const QueryParams& q, Session& s) {
  const IntermediateMap& base = ctx_->base_map();
  const long x = int_param(q, "x").value_or(0), y = int_param(q, "y").value_or(0);
  const long w = int_param(q, "w").value_or(base.width()), h = int_param(q, "h").value_or(base.height());
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > base.width() || y + h > base.height())
    return error_response(416, "tile window outside the map");
  const auto layer = ctx_->layer(overlays_of(s));
  std::string out;
  out.reserve(static_cast<size_t>(w) * h);
  const auto cells = layer->map.cells();
  for (long r = y; r < y + h; ++r) {
    const auto* row = reinterpret_cast<const char*>(cells.data() + layer->map.index(int(x), int(r)));
    out.append(row, static_cast<size_t>(w));
  }
  return {200, std::move(out), "application/octet-stream"};
}

HttpResponse PlannerService::distance_pgm(const QueryParams& q, Session& s) {
  const auto layer = ctx_->layer(overlays_of(s));
  const IntermediateMap& m = ctx_->base_map();
  std::optional<Vec2> src;
  if (q.count("x") && q.count("y")) {
    src = Vec2{*real_param(q, "x"), *real_param(q, "y")};
  } else if (q.count("lon") && q.count("lat")) {
    src = geo_to_pixel(*real_param(q, "lon"), *real_param(q, "lat"), m.transform());
  } else {
    std::lock_guard lock(s.mu);
    if (s.last_t_bar) src = s.last_t_bar->pos();
  }
  if (!src) return error_response(400, "distance field needs a source (x,y or lon,lat) or a previous plan");
  if (!m.in_bounds(cell_of(*src))) return error_response(416, "source outside the map");
  if (layer->net.empty()) return error_response(422, "map has no trails");
  const Cell down = layer->net.to_down(*src);
  const DistanceField f = wavefront_distance(layer->net.down_map(), down, 3.0);
  const auto q16 = io::quantize_distances(f.values);
  return {200, io::encode_pgm16(f.width, f.height, q16), "image/x-portable-graymap"};
}

HttpResponse PlannerService::voronoi_pgm(const QueryParams& q, Session& s) {
  const IntermediateMap& base = ctx_->base_map();
  const long x = int_param(q, "x").value_or(0), y = int_param(q, "y").value_or(0);
  const long w = int_param(q, "w").value_or(base.width()), h = int_param(q, "h").value_or(base.height());
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > base.width() || y + h > base.height())
    return error_response(416, "field window outside the map");
  if (static_cast<size_t>(w) * static_cast<size_t>(h) > opts_.max_field_cells)
    return error_response(416, "field window too large; pass x, y, w, h");
  const double alpha = real_param(q, "alpha").value_or(10.0), d_o_max = real_param(q, "d_o_max").value_or(30.0);
  const auto layer = ctx_->layer(overlays_of(s));
  const VoronoiFieldGrid f = build_voronoi_field_window(layer->map, {int(x), int(y)},
                                                        {int(x + w - 1), int(y + h - 1)}, alpha, d_o_max);
  const auto q16 = io::quantize_unit(f.v);
  return {200, io::encode_pgm16(f.width, f.height, q16), "image/x-portable-graymap"};
}

void PlannerService::save_state() {
  if (opts_.state_file.empty()) return;
  json doc = json::object();
  {
    std::lock_guard lock(sessions_mu_);
    for (auto& [id, sess] : sessions_) {
      std::lock_guard sl(sess->mu);
      json areas = json::array();
      for (const auto& a : sess->areas) {
        json e = to_json(a.overlay, ctx_->base_map().transform());
        e["id"] = a.id;
        areas.push_back(e);
      }
      doc[id] = {{"next_id", sess->next_id}, {"areas", areas}};
    }
  }
  io::write_file(opts_.state_file, doc.dump(2));
}

void PlannerService::load_state() {
  const json doc = json::parse(io::read_file(opts_.state_file));
  for (const auto& [id, j] : doc.items()) {
    auto sess = std::make_unique<Session>();
    sess->next_id = j.value("next_id", uint64_t{1});
    for (const json& a : j.at("areas")) {
      json px{{"kind", a.at("kind")}, {"polygon_px", a.at("polygon_px")}};
      sess->areas.push_back({a.at("id").get<std::string>(), overlay_from_json(px, ctx_->base_map().transform())});
    }
    sessions_[id] = std::move(sess);
  }
}

void PlannerService::mount(httplib::Server& server) {
  auto wrap = [this](const std::string& method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      const auto t0 = std::chrono::steady_clock::now();
      QueryParams q(req.params.begin(), req.params.end());
      std::string sid = req.get_header_value("X-Session-Id");
      if (sid.empty() && req.has_param("session")) sid = req.get_param_value("session");
      const HttpResponse r = handle(method, req.path, q, req.body, sid);
      res.status = r.status;
      if (r.status != 204) res.set_content(r.body, r.content_type);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      log_line(r.status >= 500 ? LogLevel::Error : LogLevel::Info,
               method + " " + req.path + " " + std::to_string(r.status) + " " + std::to_string(int(ms)) + "ms");
    };
  };
  server.Post("/plan", wrap("POST"));
  server.Post("/areas", wrap("POST"));
  server.Get("/areas", wrap("GET"));
  server.Delete(R"(/areas/([A-Za-z0-9_-]+))", wrap("DELETE"));
  server.Get("/map/meta", wrap("GET"));
  server.Get("/map/tile", wrap("GET"));
  server.Get(R"(/fields/(distance|voronoi)\.pgm)", wrap("GET"));
  server.Get("/health", wrap("GET"));
}

bool serve(PlannerService& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  log_line(LogLevel::Warn, "listening on " + host + ":" + std::to_string(port));
  return server.listen(host, port);
}

}  // namespace offroad
