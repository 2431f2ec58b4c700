#pragma once

#include "json.hpp"

#include "offroad/pipeline.hpp"

namespace offroad {

/// Parses a plan request. Overlay polygons are given either as lon/lat pairs
/// ("polygon") or pixel pairs ("polygon_px"); `t` converts the former.
/// Malformed input throws PlanningError(InvalidArgument, ..., "request").
PlanRequest plan_request_from_json(const nlohmann::json& j, const GeoTransform& t);
nlohmann::json to_json(const PlanRequest& r);

AreaOverlay overlay_from_json(const nlohmann::json& j, const GeoTransform& t);
nlohmann::json to_json(const AreaOverlay& o, const GeoTransform& t);

/// Run-dependent figures (stage times, total time, peak memory) live under
/// "timings" so that responses can be compared without them.
nlohmann::json to_json(const PlanResult& r);

/// FeatureCollection with one LineString (lon, lat) per segment.
nlohmann::json to_geojson(const PlanResult& r);

nlohmann::json error_json(const PlanningError& e);

}  // namespace offroad
