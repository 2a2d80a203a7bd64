#pragma once

// Distance features for listings: great-circle distances on a sphere of radius
// 6,371 km, point-to-polyline distances solved in a local tangent plane, and
// nearest-centroid assignment. Distances are in meters.

#include <map>
#include <string>
#include <vector>

#include "bnlab/data.hpp"

namespace bnlab::spatial {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

class GeoPoint {
 public:
  GeoPoint(double latitude, double longitude);
  double latitude() const noexcept { return lat_; }
  double longitude() const noexcept { return lon_; }
  bool operator==(const GeoPoint&) const = default;

 private:
  double lat_;
  double lon_;
};

struct Polyline {
  std::string name;
  std::vector<GeoPoint> vertices;  // at least two

  Polyline(std::string name, std::vector<GeoPoint> vertices);
};

/// Closed ring; the closing edge from the last vertex back to the first is implicit.
struct Polygon {
  std::string name;
  std::vector<GeoPoint> vertices;  // at least three
};

using CentroidSet = std::map<std::string, GeoPoint>;

double haversine(const GeoPoint& a, const GeoPoint& b);

/// Minimum over segments of the distance to the perpendicular foot (clamped to
/// the segment) found in the gnomonic tangent plane at `p`. Never exceeds the
/// distance to any vertex.
double point_to_polyline_distance(const GeoPoint& p, const Polyline& line);

/// Label with the smallest haversine distance; ties go to the smaller label.
const std::string& nearest_centroid(const GeoPoint& p, const CentroidSet& centroids);

/// Even-odd ray casting on (longitude, latitude).
bool point_in_polygon(const GeoPoint& p, const Polygon& polygon);

/// Named geometry loaded from a layers file.
struct GeoLayers {
  std::map<std::string, GeoPoint> points;
  std::map<std::string, Polyline> polylines;
  std::map<std::string, Polygon> polygons;
  CentroidSet centroids;
};

/// JSON layers file:
///   {"points":    [{"name": "centre", "lat": .., "lon": ..}],
///    "polylines": [{"name": "main_avenue", "vertices": [[lat, lon], ...]}],
///    "polygons":  [{"name": "city", "vertices": [[lat, lon], ...]}],
///    "centroids": [{"name": "Ruzafa", "lat": .., "lon": ..}]}
GeoLayers load_layers(const std::string& path);
GeoLayers parse_layers(const std::string& json_text);

enum class FeatureKind { distance_to_point, distance_to_polyline, nearest_centroid };

/// Derived column computed from a listing's coordinates.
struct FeatureSpec {
  std::string name;    // new column
  FeatureKind kind = FeatureKind::distance_to_point;
  std::string layer;   // point / polyline name (unused for nearest_centroid)
};

struct CoordinateColumns {
  std::string latitude = "LAT";
  std::string longitude = "LON";
};

/// Appends one column per feature. Rows with missing or out-of-range
/// coordinates get a missing cell.
void add_features(data::RawTable& table, const std::vector<FeatureSpec>& features,
                  const GeoLayers& layers, const CoordinateColumns& coords);

/// Keep-mask of rows whose coordinates fall inside `boundary`.
std::vector<bool> inside_boundary(const data::RawTable& table, const Polygon& boundary,
                                  const CoordinateColumns& coords);

}  // namespace bnlab::spatial
