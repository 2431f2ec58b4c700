#include "offroad/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace offroad::io {

namespace {

[[noreturn]] void io_error(const std::string& what) { throw PlanningError(ErrorKind::Io, what, "io"); }

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_le(std::span<const char> bytes, size_t offset) {
  if (offset + sizeof(T) > bytes.size()) io_error("truncated map cache");
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

// Minimal TIFF reader honouring both byte orders.
class TiffReader {
 public:
  explicit TiffReader(std::string data) : data_(std::move(data)) {
    if (data_.size() < 8) io_error("not a TIFF file");
    if (data_.compare(0, 2, "II") == 0) big_ = false;
    else if (data_.compare(0, 2, "MM") == 0) big_ = true;
    else io_error("not a TIFF file");
    if (u16(2) != 42) io_error("only classic TIFF is supported");
  }

  uint16_t u16(size_t off) const { return static_cast<uint16_t>(read(off, 2)); }
  uint32_t u32(size_t off) const { return static_cast<uint32_t>(read(off, 4)); }
  double f64(size_t off) const {
    const uint64_t bits = read(off, 8);
    return std::bit_cast<double>(bits);
  }

 private:
  uint64_t read(size_t off, int n) const {
    if (off + n > data_.size()) io_error("truncated TIFF");
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      const uint64_t b = static_cast<uint8_t>(data_[off + i]);
      v |= big_ ? b << (8 * (n - 1 - i)) : b << (8 * i);
    }
    return v;
  }

  std::string data_;
  bool big_ = false;
};

std::vector<Vec2> ring_from_json(const nlohmann::json& coords) {
  std::vector<Vec2> ring;
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2) io_error("malformed GeoJSON position");
    ring.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  // GeoJSON rings repeat the first position at the end.
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

GeoTransform read_world_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  double v[6];
  for (double& x : v)
    if (!(in >> x)) io_error("world file needs six numeric lines: " + path.string());
  if (v[1] != 0.0 || v[2] != 0.0) io_error("rotated world files are not supported");
  GeoTransform t;
  t.pixel_width = v[0];
  t.pixel_height = v[3];
  t.x_origin = v[4];
  t.y_origin = v[5];
  t.validate();
  return t;
}

void write_world_file(const std::filesystem::path& path, const GeoTransform& t) {
  std::ostringstream out;
  out << std::setprecision(17) << t.pixel_width << "\n0\n0\n" << t.pixel_height << "\n"
      << t.x_origin << "\n" << t.y_origin << "\n";
  write_file(path, out.str());
}

RasterHeader read_geotiff_header(const std::filesystem::path& path) {
  TiffReader tiff(read_file(path));
  const uint32_t ifd = tiff.u32(4);
  const uint16_t count = tiff.u16(ifd);
  RasterHeader h;
  double scale[3] = {0, 0, 0};
  double tie[6] = {0, 0, 0, 0, 0, 0};
  bool have_scale = false, have_tie = false;
  for (uint16_t e = 0; e < count; ++e) {
    const size_t entry = ifd + 2 + 12 * size_t(e);
    const uint16_t tag = tiff.u16(entry);
    const uint16_t type = tiff.u16(entry + 2);
    const uint32_t n = tiff.u32(entry + 4);
    auto scalar = [&]() -> int {
      return type == 3 ? tiff.u16(entry + 8) : static_cast<int>(tiff.u32(entry + 8));
    };
    switch (tag) {
      case 256: h.width = scalar(); break;
      case 257: h.height = scalar(); break;
      case 33550:
        if (type != 12 || n < 2) io_error("unexpected ModelPixelScale encoding");
        for (uint32_t i = 0; i < std::min<uint32_t>(n, 3); ++i) scale[i] = tiff.f64(tiff.u32(entry + 8) + 8 * i);
        have_scale = true;
        break;
      case 33922:
        if (type != 12 || n < 6) io_error("unexpected ModelTiepoint encoding");
        for (uint32_t i = 0; i < 6; ++i) tie[i] = tiff.f64(tiff.u32(entry + 8) + 8 * i);
        have_tie = true;
        break;
      case 34264: io_error("ModelTransformation (rotated rasters) is not supported");
      default: break;
    }
  }
  if (!have_scale || !have_tie || h.width <= 0 || h.height <= 0)
    io_error("GeoTIFF lacks dimensions or georeference tags");
  h.transform.pixel_width = scale[0];
  h.transform.pixel_height = -scale[1];
  h.transform.x_origin = tie[3] - tie[0] * scale[0];
  h.transform.y_origin = tie[4] + tie[1] * scale[1];
  h.transform.validate();
  return h;
}

CellClass class_from_name(const std::string& name) {
  if (name == "trail") return CellClass::Trail;
  if (name == "river" || name == "water") return CellClass::Water;
  if (name == "building" || name == "tree") return CellClass::Obstacle;
  if (name == "restricted") return CellClass::Restricted;
  throw PlanningError(ErrorKind::InvalidArgument, "unknown feature class '" + name + "'");
}

std::vector<GeoFeature> parse_geojson(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
    io_error("expected a GeoJSON FeatureCollection");
  std::vector<GeoFeature> out;
  const auto& features = doc.at("features");
  for (size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    const auto& props = f.contains("properties") && f["properties"].is_object()
                            ? f["properties"]
                            : nlohmann::json::object();
    const CellClass cls = class_from_name(props.value("class", std::string("building")));
    const double width = props.value("width_px", 0.0);
    const auto& geom = f.at("geometry");
    const std::string type = geom.at("type").get<std::string>();
    const auto& coords = geom.at("coordinates");
    auto push = [&](GeometryKind kind, std::vector<std::vector<Vec2>> parts) {
      out.push_back(GeoFeature{kind, cls, std::move(parts), width});
    };
    if (type == "Polygon") {
      std::vector<std::vector<Vec2>> rings;
      for (const auto& r : coords) rings.push_back(ring_from_json(r));
      push(GeometryKind::Polygon, std::move(rings));
    } else if (type == "MultiPolygon") {
      for (const auto& poly : coords) {
        std::vector<std::vector<Vec2>> rings;
        for (const auto& r : poly) rings.push_back(ring_from_json(r));
        push(GeometryKind::Polygon, std::move(rings));
      }
    } else if (type == "LineString") {
      std::vector<Vec2> line;
      for (const auto& c : coords) line.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
      push(GeometryKind::LineString, {std::move(line)});
    } else if (type == "MultiLineString") {
      std::vector<std::vector<Vec2>> parts;
      for (const auto& l : coords) {
        std::vector<Vec2> line;
        for (const auto& c : l) line.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
        parts.push_back(std::move(line));
      }
      push(GeometryKind::LineString, std::move(parts));
    } else {
      throw PlanningError(ErrorKind::UnsupportedGeometry,
                          "unsupported geometry '" + type + "' in feature " + std::to_string(i),
                          "geojson", i);
    }
  }
  return out;
}

std::vector<GeoFeature> load_geojson(const std::filesystem::path& path) {
  try {
    return parse_geojson(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    io_error(path.string() + ": " + e.what());
  }
}

std::string encode_map_cache(const IntermediateMap& map) {
  std::string out;
  out.reserve(4 + 8 + 64 + map.size());
  out.append("OFRM");
  put_le<uint32_t>(out, static_cast<uint32_t>(map.width()));
  put_le<uint32_t>(out, static_cast<uint32_t>(map.height()));
  const GeoTransform& t = map.transform();
  const double values[8] = {t.x_origin, t.pixel_width, 0.0, t.y_origin, 0.0, t.pixel_height, 4326.0, 0.0};
  for (double v : values) put_le<double>(out, v);
  const auto cells = map.cells();
  out.append(reinterpret_cast<const char*>(cells.data()), cells.size());
  return out;
}

IntermediateMap decode_map_cache(std::span<const char> bytes) {
  if (bytes.size() < 76 || std::memcmp(bytes.data(), "OFRM", 4) != 0) io_error("not an OFRM map cache");
  const uint32_t w = get_le<uint32_t>(bytes, 4);
  const uint32_t h = get_le<uint32_t>(bytes, 8);
  double v[8];
  for (int i = 0; i < 8; ++i) v[i] = get_le<double>(bytes, 12 + 8 * i);
  const size_t n = static_cast<size_t>(w) * h;
  if (bytes.size() != 76 + n) io_error("map cache size does not match its header");
  GeoTransform t;
  t.x_origin = v[0];
  t.pixel_width = v[1];
  t.y_origin = v[3];
  t.pixel_height = v[5];
  t.validate();
  std::vector<CellClass> cells(n);
  for (size_t i = 0; i < n; ++i) {
    const auto code = static_cast<uint8_t>(bytes[76 + i]);
    if (code > static_cast<uint8_t>(CellClass::PassableOverride)) io_error("invalid cell class code");
    cells[i] = static_cast<CellClass>(code);
  }
  return IntermediateMap(static_cast<int>(w), static_cast<int>(h), std::move(cells), t);
}

void save_map_cache(const IntermediateMap& map, const std::filesystem::path& path) {
  write_file(path, encode_map_cache(map));
}

IntermediateMap load_map_cache(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  return decode_map_cache(data);
}

std::string encode_pgm16(int width, int height, std::span<const uint16_t> samples) {
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  out.reserve(out.size() + samples.size() * 2);
  for (uint16_t s : samples) {
    out.push_back(static_cast<char>(s >> 8));
    out.push_back(static_cast<char>(s & 0xff));
  }
  return out;
}

std::vector<uint16_t> quantize_distances(std::span<const double> values) {
  std::vector<uint16_t> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (std::isinf(v)) out[i] = 65535;
    else out[i] = static_cast<uint16_t>(std::min(65534.0, std::max(0.0, std::round(v))));
  }
  return out;
}

std::vector<uint16_t> quantize_unit(std::span<const double> values) {
  std::vector<uint16_t> out(values.size());
  for (size_t i = 0; i < values.size(); ++i)
    out[i] = static_cast<uint16_t>(std::round(std::clamp(values[i], 0.0, 1.0) * 65535.0));
  return out;
}

}  // namespace offroad::io
