#include "offroad/json_io.hpp"

#include <cmath>

namespace offroad {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw PlanningError(ErrorKind::InvalidArgument, msg, "request"); }

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) bad(where + "." + key + " is required");
  const json& v = j.at(key);
  if (!v.is_number()) bad(where + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(where + "." + key + " must be finite");
  return d;
}

double number_or(const json& j, const char* key, double dflt, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : dflt;
}

PlanEndpoint endpoint(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  PlanEndpoint e;
  e.lon = number(j, "lon", where);
  e.lat = number(j, "lat", where);
  if (e.lon < -180 || e.lon > 180) bad(where + ".lon out of range");
  if (e.lat < -90 || e.lat > 90) bad(where + ".lat out of range");
  if (j.contains("heading") && !j.at("heading").is_null()) e.heading = number(j, "heading", where);
  return e;
}

json endpoint_json(const PlanEndpoint& e) {
  json j{{"lon", e.lon}, {"lat", e.lat}};
  if (e.heading) j["heading"] = *e.heading;
  return j;
}

json points_json(const PixelPath& p) {
  json a = json::array();
  for (const Vec2& v : p) a.push_back({v.x, v.y});
  return a;
}

json geo_json(const PixelPath& p, const GeoTransform& t) {
  json a = json::array();
  for (const Vec2& v : p) {
    const GeoPoint g = pixel_to_geo(v.x, v.y, t);
    a.push_back({g.lon, g.lat});
  }
  return a;
}

json pose_json(const std::optional<Pose>& p) {
  if (!p) return nullptr;
  return {{"x", p->x}, {"y", p->y}, {"heading", p->theta}};
}

json finite_or(double v, const char* label) {
  if (std::isfinite(v)) return v;
  return label;
}

template <typename T>
void set_if(const json& p, const char* key, T& field) {
  if (!p.contains(key)) return;
  const json& v = p.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) bad(std::string("params.") + key + " must be a boolean");
    field = v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || v.get<long long>() < 0) bad(std::string("params.") + key + " must be a nonnegative integer");
    field = static_cast<T>(v.get<long long>());
  } else {
    field = number(p, key, "params");
  }
}

AreaOverlay parse_overlay(const json& j, const GeoTransform& t) {
  if (!j.is_object()) bad("overlay must be an object");
  AreaOverlay o;
  const std::string kind = j.value("kind", "");
  if (kind == "restricted") o.kind = OverlayKind::Restricted;
  else if (kind == "passable") o.kind = OverlayKind::Passable;
  else bad("overlay kind must be \"restricted\" or \"passable\"");
  const bool px = j.contains("polygon_px");
  const json& poly = px ? j.at("polygon_px") : (j.contains("polygon") ? j.at("polygon") : json());
  if (!poly.is_array()) bad("overlay needs a polygon or polygon_px array");
  for (const json& v : poly) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) bad("polygon vertices must be [x, y] pairs");
    const double a = v[0].get<double>(), b = v[1].get<double>();
    if (!std::isfinite(a) || !std::isfinite(b)) bad("polygon vertices must be finite");
    o.polygon.push_back(px ? Vec2{a, b} : geo_to_pixel(a, b, t));
  }
  if (o.polygon.size() >= 2 && distance(o.polygon.front(), o.polygon.back()) < 1e-12) o.polygon.pop_back();
  if (o.polygon.size() < 3) bad("polygon needs at least 3 distinct vertices");
  if (std::abs(polygon_area(o.polygon)) < 1e-9) bad("polygon has zero area");
  return o;
}

PlanRequest parse_request(const json& j, const GeoTransform& t) {
  if (!j.is_object()) bad("request must be a JSON object");
  PlanRequest r;
  if (!j.contains("start") || !j.contains("target")) bad("start and target are required");
  r.start = endpoint(j.at("start"), "start");
  r.target = endpoint(j.at("target"), "target");

  const std::string mode = j.value("mode", "TRAIL_PREFERRED");
  if (mode == "TRAIL_PREFERRED") r.mode = PlanMode::TrailPreferred;
  else if (mode == "DIRECT") r.mode = PlanMode::Direct;
  else bad("mode must be TRAIL_PREFERRED or DIRECT");

  const std::string planner = j.value("planner", "JPS");
  if (planner == "JPS") r.planner = GridPlanner::Jps;
  else if (planner == "ASTAR") r.planner = GridPlanner::AStar;
  else bad("planner must be JPS or ASTAR");

  if (j.contains("model")) {
    const json& m = j.at("model");
    if (!m.is_object()) bad("model must be an object");
    r.wheelbase_m = number_or(m, "wheelbase_m", r.wheelbase_m, "model");
    r.phi_max = number_or(m, "phi_max", r.phi_max, "model");
  }
  if (!(r.wheelbase_m > 0)) bad("model.wheelbase_m must be positive");
  if (!(r.phi_max > 0) || !(r.phi_max < std::numbers::pi / 2)) bad("model.phi_max must lie in (0, pi/2)");

  if (j.contains("overlays")) {
    if (!j.at("overlays").is_array()) bad("overlays must be an array");
    for (const json& o : j.at("overlays")) r.overlays.push_back(parse_overlay(o, t));
  }

  if (j.contains("params")) {
    const json& p = j.at("params");
    if (!p.is_object()) bad("params must be an object");
    PlannerParams& P = r.params;
    set_if(p, "vehicle_width_m", P.vehicle_width_m);
    set_if(p, "clearance_margin_m", P.clearance_margin_m);
    set_if(p, "poly_md", P.poly_md);
    set_if(p, "poly_sd", P.poly_sd);
    set_if(p, "poly_md_max", P.poly_md_max);
    set_if(p, "poly_sd_max", P.poly_sd_max);
    set_if(p, "md_i", P.md_i);
    set_if(p, "sd_i", P.sd_i);
    set_if(p, "dbscan_eps", P.dbscan_eps);
    set_if(p, "dbscan_min_pts", P.dbscan_min_pts);
    set_if(p, "alpha", P.alpha);
    set_if(p, "d_o_max", P.d_o_max);
    set_if(p, "lambda_o", P.lambda_o);
    set_if(p, "lambda_k", P.lambda_k);
    set_if(p, "lambda_s", P.lambda_s);
    set_if(p, "max_iterations", P.max_iterations);
    set_if(p, "smooth_chunk", P.smooth_chunk);
    set_if(p, "slice_offset", P.slice_offset);
    set_if(p, "max_expansions", P.max_expansions);
    set_if(p, "simplify", P.simplify);
    set_if(p, "repair", P.repair);
    set_if(p, "smooth", P.smooth);
    set_if(p, "time_budget_s", P.time_budget_s);
    if (P.vehicle_width_m < 0 || P.time_budget_s < 0 || !(P.alpha > 0) || !(P.d_o_max > 0))
      bad("params out of range");
  }
  return r;
}

}  // namespace

AreaOverlay overlay_from_json(const json& j, const GeoTransform& t) {
  try {
    return parse_overlay(j, t);
  } catch (const json::exception& e) {
    bad(std::string("malformed overlay: ") + e.what());
  }
}

PlanRequest plan_request_from_json(const json& j, const GeoTransform& t) {
  try {
    return parse_request(j, t);
  } catch (const json::exception& e) {
    bad(std::string("malformed request: ") + e.what());
  }
}

json to_json(const AreaOverlay& o, const GeoTransform& t) {
  json geo = json::array();
  for (const Vec2& p : o.polygon) {
    const GeoPoint g = pixel_to_geo(p.x, p.y, t);
    geo.push_back({g.lon, g.lat});
  }
  return {{"kind", o.kind == OverlayKind::Restricted ? "restricted" : "passable"},
          {"polygon", geo},
          {"polygon_px", points_json(o.polygon)}};
}

json to_json(const PlanRequest& r) {
  const PlannerParams& P = r.params;
  json overlays = json::array();
  for (const auto& o : r.overlays)
    overlays.push_back({{"kind", o.kind == OverlayKind::Restricted ? "restricted" : "passable"},
                        {"polygon_px", points_json(o.polygon)}});
  return {
      {"start", endpoint_json(r.start)},
      {"target", endpoint_json(r.target)},
      {"mode", to_string(r.mode)},
      {"planner", r.planner == GridPlanner::Jps ? "JPS" : "ASTAR"},
      {"model", {{"wheelbase_m", r.wheelbase_m}, {"phi_max", r.phi_max}}},
      {"overlays", overlays},
      {"params",
       {{"vehicle_width_m", P.vehicle_width_m}, {"clearance_margin_m", P.clearance_margin_m},
        {"poly_md", P.poly_md}, {"poly_sd", P.poly_sd}, {"poly_md_max", P.poly_md_max},
        {"poly_sd_max", P.poly_sd_max}, {"md_i", P.md_i}, {"sd_i", P.sd_i}, {"dbscan_eps", P.dbscan_eps},
        {"dbscan_min_pts", P.dbscan_min_pts}, {"alpha", P.alpha}, {"d_o_max", P.d_o_max},
        {"lambda_o", P.lambda_o}, {"lambda_k", P.lambda_k}, {"lambda_s", P.lambda_s},
        {"max_iterations", P.max_iterations}, {"smooth_chunk", P.smooth_chunk}, {"slice_offset", P.slice_offset},
        {"max_expansions", P.max_expansions}, {"simplify", P.simplify}, {"repair", P.repair},
        {"smooth", P.smooth}, {"time_budget_s", P.time_budget_s}}},
  };
}

json to_json(const PlanResult& r) {
  const GeoTransform& t = r.transform;
  json segs = json::array();
  for (const auto& s : r.segments)
    segs.push_back({{"kind", to_string(s.kind)}, {"pixels", points_json(s.pixels)}, {"geo", geo_json(s.pixels, t)}});
  json geo = json::array();
  for (const GeoPoint& g : r.geo) geo.push_back({g.lon, g.lat});
  json stages = json::object();
  for (const auto& [name, ms] : r.metrics.stage_ms) stages[name] = ms;
  return {
      {"segments", segs},
      {"path", {{"pixels", points_json(r.path)}, {"geo", geo}}},
      {"metrics",
       {{"length_m", r.metrics.length_m},
        {"max_curvature", r.metrics.max_curvature},
        {"csd", r.metrics.csd},
        {"mod", finite_or(r.metrics.mod, "unbounded")}}},
      {"timings", {{"stage_ms", stages}, {"total_ms", r.metrics.total_ms}, {"peak_memory_bytes", r.metrics.peak_memory_bytes}}},
      {"mode_used", to_string(r.mode_used)},
      {"fell_back_to_direct", r.fell_back_to_direct},
      {"diagnostics",
       {{"s_bar", pose_json(r.s_bar)}, {"t_bar", pose_json(r.t_bar)}, {"repaired_segments", r.repaired_segments}}},
      {"meters_per_pixel", r.meters_per_pixel},
      {"k_max", r.k_max},
  };
}

json to_geojson(const PlanResult& r) {
  const GeoTransform& t = r.transform;
  json features = json::array();
  for (size_t i = 0; i < r.segments.size(); ++i) {
    const auto& s = r.segments[i];
    features.push_back({{"type", "Feature"},
                        {"properties", {{"kind", to_string(s.kind)}, {"index", i}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", geo_json(s.pixels, t)}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

json error_json(const PlanningError& e) {
  json j{{"error", e.what()}, {"kind", to_string(e.kind())}, {"stage", e.stage()}};
  if (e.index()) j["index"] = *e.index();
  return j;
}

}  // namespace offroad
