#include "bnlab/spatial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace bnlab::spatial {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap_degrees(double d) {
  while (d > 180.0) d -= 360.0;
  while (d < -180.0) d += 360.0;
  return d;
}

GeoPoint point_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_array()) {
    if (j.size() != 2) throw SchemaError(where + ": coordinate pairs are [lat, lon]");
    return GeoPoint(j[0].get<double>(), j[1].get<double>());
  }
  if (!j.contains("lat") || !j.contains("lon")) throw SchemaError(where + ": needs lat and lon");
  return GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
}

std::vector<GeoPoint> vertices_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.contains("vertices") || !j.at("vertices").is_array())
    throw SchemaError(where + ": needs a vertices array");
  std::vector<GeoPoint> out;
  for (const auto& v : j.at("vertices")) out.push_back(point_from_json(v, where));
  return out;
}

}  // namespace

GeoPoint::GeoPoint(double latitude, double longitude) : lat_(latitude), lon_(longitude) {
  if (!(latitude >= -90.0 && latitude <= 90.0))
    throw ContractError("latitude " + std::to_string(latitude) + " outside [-90, 90]");
  if (!(longitude >= -180.0 && longitude <= 180.0))
    throw ContractError("longitude " + std::to_string(longitude) + " outside [-180, 180]");
}

Polyline::Polyline(std::string n, std::vector<GeoPoint> v) : name(std::move(n)), vertices(std::move(v)) {
  if (vertices.size() < 2) throw ContractError("polyline '" + name + "' needs at least two vertices");
}

double haversine(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.latitude() * kDegToRad, phi2 = b.latitude() * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = wrap_degrees(b.longitude() - a.longitude()) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0), s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

double point_to_polyline_distance(const GeoPoint& p, const Polyline& line) {
  // Gnomonic tangent plane at p: great circles map to straight lines and the
  // plane radius r maps to the angular distance atan(r), so the planar foot of
  // the perpendicular is the spherical closest point of the segment.
  using Vec = std::array<double, 3>;
  auto unit = [](const GeoPoint& g) {
    const double la = g.latitude() * kDegToRad, lo = g.longitude() * kDegToRad;
    return Vec{std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
  };
  auto dot = [](const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };
  const double la = p.latitude() * kDegToRad, lo = p.longitude() * kDegToRad;
  const Vec c = unit(p);
  const Vec east{-std::sin(lo), std::cos(lo), 0.0};
  const Vec north{-std::sin(la) * std::cos(lo), -std::sin(la) * std::sin(lo), std::cos(la)};
  struct Planar {
    double x, y;
    bool ok;
  };
  auto project = [&](const GeoPoint& q) {
    const Vec v = unit(q);
    const double h = dot(v, c);
    if (h < 1e-6) return Planar{0.0, 0.0, false};  // beyond the hemisphere of p
    return Planar{dot(v, east) / h, dot(v, north) / h, true};
  };

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s + 1 < line.vertices.size(); ++s) {
    const GeoPoint& a = line.vertices[s];
    const GeoPoint& b = line.vertices[s + 1];
    best = std::min({best, haversine(p, a), haversine(p, b)});
    const Planar pa = project(a), pb = project(b);
    if (!pa.ok || !pb.ok) continue;
    const double dx = pb.x - pa.x, dy = pb.y - pa.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) continue;
    const double t = std::clamp(-(pa.x * dx + pa.y * dy) / len2, 0.0, 1.0);
    if (t == 0.0 || t == 1.0) continue;
    const double fx = pa.x + t * dx, fy = pa.y + t * dy;
    best = std::min(best, kEarthRadiusMeters * std::atan(std::hypot(fx, fy)));
  }
  return best;
}

const std::string& nearest_centroid(const GeoPoint& p, const CentroidSet& centroids) {
  if (centroids.empty()) throw ContractError("nearest_centroid needs at least one centroid");
  const std::string* best_label = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [label, c] : centroids) {  // map order = lexicographic, strict < keeps the first tie
    double d = haversine(p, c);
    if (d < best) {
      best = d;
      best_label = &label;
    }
  }
  return *best_label;
}

bool point_in_polygon(const GeoPoint& p, const Polygon& polygon) {
  const auto& v = polygon.vertices;
  if (v.size() < 3) throw ContractError("polygon '" + polygon.name + "' needs at least three vertices");
  const double x = p.longitude(), y = p.latitude();
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const double xi = v[i].longitude(), yi = v[i].latitude();
    const double xj = v[j].longitude(), yj = v[j].latitude();
    if ((yi > y) != (yj > y)) {
      const double cross = xj + (y - yj) * (xi - xj) / (yi - yj);
      if (x < cross) inside = !inside;
    }
  }
  return inside;
}

GeoLayers parse_layers(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("layers file is not valid JSON: ") + e.what());
  }
  GeoLayers out;
  auto named = [&](const char* key, auto&& add) {
    if (!j.contains(key)) return;
    for (const auto& item : j.at(key)) {
      if (!item.contains("name")) throw SchemaError(std::string(key) + ": every entry needs a name");
      add(item.at("name").get<std::string>(), item);
    }
  };
  try {
    named("points", [&](std::string n, const nlohmann::json& it) {
      if (!out.points.emplace(n, point_from_json(it, "point '" + n + "'")).second)
        throw SchemaError("duplicate point '" + n + "'");
    });
    named("centroids", [&](std::string n, const nlohmann::json& it) {
      if (!out.centroids.emplace(n, point_from_json(it, "centroid '" + n + "'")).second)
        throw SchemaError("duplicate centroid '" + n + "'");
    });
    named("polylines", [&](std::string n, const nlohmann::json& it) {
      Polyline line(n, vertices_from_json(it, "polyline '" + n + "'"));
      if (!out.polylines.emplace(n, std::move(line)).second)
        throw SchemaError("duplicate polyline '" + n + "'");
    });
    named("polygons", [&](std::string n, const nlohmann::json& it) {
      Polygon poly{n, vertices_from_json(it, "polygon '" + n + "'")};
      if (poly.vertices.size() < 3) throw SchemaError("polygon '" + n + "' needs three vertices");
      if (!out.polygons.emplace(n, std::move(poly)).second)
        throw SchemaError("duplicate polygon '" + n + "'");
    });
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("layers file: ") + e.what());
  } catch (const ContractError& e) {
    throw SchemaError(std::string("layers file: ") + e.what());
  }
  return out;
}

GeoLayers load_layers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_layers(ss.str());
}

namespace {

std::optional<GeoPoint> row_point(const data::RawTable& table, const std::vector<data::Cell>& row,
                                  const CoordinateColumns& coords) {
  auto lat = data::as_number(row[table.index(coords.latitude)]);
  auto lon = data::as_number(row[table.index(coords.longitude)]);
  if (!lat || !lon || *lat < -90 || *lat > 90 || *lon < -180 || *lon > 180) return std::nullopt;
  return GeoPoint(*lat, *lon);
}

}  // namespace

void add_features(data::RawTable& table, const std::vector<FeatureSpec>& features,
                  const GeoLayers& layers, const CoordinateColumns& coords) {
  table.index(coords.latitude);
  table.index(coords.longitude);
  for (const auto& f : features) {
    std::vector<data::Cell> values(table.row_count());
    const GeoPoint* target = nullptr;
    const Polyline* line = nullptr;
    if (f.kind == FeatureKind::distance_to_point) {
      auto it = layers.points.find(f.layer);
      if (it == layers.points.end()) throw SchemaError("feature '" + f.name + "': no point '" + f.layer + "'");
      target = &it->second;
    } else if (f.kind == FeatureKind::distance_to_polyline) {
      auto it = layers.polylines.find(f.layer);
      if (it == layers.polylines.end())
        throw SchemaError("feature '" + f.name + "': no polyline '" + f.layer + "'");
      line = &it->second;
    } else if (layers.centroids.empty()) {
      throw SchemaError("feature '" + f.name + "': layers file has no centroids");
    }
    for (std::size_t i = 0; i < table.row_count(); ++i) {
      auto p = row_point(table, table.rows()[i], coords);
      if (!p) continue;
      switch (f.kind) {
        case FeatureKind::distance_to_point: values[i] = haversine(*p, *target); break;
        case FeatureKind::distance_to_polyline: values[i] = point_to_polyline_distance(*p, *line); break;
        case FeatureKind::nearest_centroid: values[i] = nearest_centroid(*p, layers.centroids); break;
      }
    }
    table.add_column(f.name, std::move(values));
  }
}

std::vector<bool> inside_boundary(const data::RawTable& table, const Polygon& boundary,
                                  const CoordinateColumns& coords) {
  std::vector<bool> keep(table.row_count(), false);
  for (std::size_t i = 0; i < table.row_count(); ++i)
    if (auto p = row_point(table, table.rows()[i], coords)) keep[i] = point_in_polygon(*p, boundary);
  return keep;
}

}  // namespace bnlab::spatial
