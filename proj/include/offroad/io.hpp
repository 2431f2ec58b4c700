#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "offroad/geomap.hpp"

namespace offroad::io {

/// Raster dimensions plus georeference, as read from a GeoTIFF header.
struct RasterHeader {
  int width = 0;
  int height = 0;
  GeoTransform transform;
};

/// ESRI world file: six decimal lines (A, D, B, E, C, F). Rotation terms must be zero.
GeoTransform read_world_file(const std::filesystem::path& path);
void write_world_file(const std::filesystem::path& path, const GeoTransform& t);

/// Reads ImageWidth/ImageLength and ModelPixelScale/ModelTiepoint tags only;
/// pixel data is never decoded.
RasterHeader read_geotiff_header(const std::filesystem::path& path);

/// GeoJSON FeatureCollection -> features in lon/lat. The "class" property picks
/// the cell class: trail, river, water, building, tree, restricted.
std::vector<GeoFeature> parse_geojson(const nlohmann::json& doc);
std::vector<GeoFeature> load_geojson(const std::filesystem::path& path);
CellClass class_from_name(const std::string& name);

/// Binary map cache: "OFRM", u32 width, u32 height, 8 x f64 transform values
/// (x_origin, pixel_width, 0, y_origin, 0, pixel_height, epsg, 0), then one
/// byte per cell. Little-endian throughout.
std::string encode_map_cache(const IntermediateMap& map);
IntermediateMap decode_map_cache(std::span<const char> bytes);
void save_map_cache(const IntermediateMap& map, const std::filesystem::path& path);
IntermediateMap load_map_cache(const std::filesystem::path& path);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
std::string encode_pgm16(int width, int height, std::span<const uint16_t> samples);

/// Distances in pixels; +inf maps to 65535, finite values saturate at 65534.
std::vector<uint16_t> quantize_distances(std::span<const double> values);
/// Values in [0, 1] scaled to [0, 65535].
std::vector<uint16_t> quantize_unit(std::span<const double> values);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace offroad::io
