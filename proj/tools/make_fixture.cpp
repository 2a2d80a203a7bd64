// Deterministic synthetic listings for the end-to-end fixtures: a compact city
// with a centre, two avenues, a metro line, a park, a market and a dozen
// neighborhoods. Prices follow a log-linear model of location, size, quality
// and age, so the learned network has real structure to find. A few duplicate,
// missing, out-of-boundary and outlier rows exercise every cleaning stage.
//
//   make_fixture <out_dir> [rows] [seed]

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bnlab/format.hpp"
#include "bnlab/learn.hpp"
#include "bnlab/spatial.hpp"

namespace {

using bnlab::format_number;
using bnlab::learn::unit_uniform;
using bnlab::spatial::GeoPoint;

const GeoPoint kCentre{39.4699, -0.3763};
constexpr double kMetresPerDegLat = 111194.9;

GeoPoint offset(const GeoPoint& from, double north_m, double east_m) {
  const double lat = from.latitude() + north_m / kMetresPerDegLat;
  const double lon = from.longitude() + east_m / (kMetresPerDegLat * std::cos(from.latitude() * std::numbers::pi / 180.0));
  return {lat, lon};
}

struct Rng {
  std::mt19937_64 engine;
  double u() { return unit_uniform(engine); }
  double normal() {
    // Box-Muller on the portable uniform source
    const double a = 1.0 - u(), b = u();
    return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * std::numbers::pi * b);
  }
  bool chance(double p) { return u() < p; }
};

struct Layout {
  GeoPoint park{0, 0}, market{0, 0};
  std::vector<GeoPoint> avenue1, avenue2, metro;
  std::vector<std::pair<std::string, GeoPoint>> hoods;
  std::vector<GeoPoint> boundary;
};

Layout make_layout() {
  Layout l;
  l.park = offset(kCentre, 1200, -900);
  l.market = offset(kCentre, -600, 700);
  for (double t = -4500; t <= 4500; t += 1500) l.avenue1.push_back(offset(kCentre, 300 + 0.1 * t, t));
  for (double t = -4500; t <= 4500; t += 1500) l.avenue2.push_back(offset(kCentre, t, -800 + 0.2 * t));
  for (double t = -4000; t <= 4000; t += 1000) l.metro.push_back(offset(kCentre, 0.7 * t, -0.7 * t + 1500));
  const char* names[] = {"Ciutat Vella", "Eixample", "Extramurs", "Campanar", "La Saidia", "El Pla del Real",
                         "Olivereta", "Patraix", "Jesus", "Quatre Carreres", "Camins al Grau", "Algiros"};
  for (int i = 0; i < 12; ++i) {
    const double ring = i == 0 ? 0.0 : (i < 5 ? 1500.0 : 3200.0);
    const double angle = 2.0 * std::numbers::pi * i / 7.0;
    l.hoods.emplace_back(names[i], offset(kCentre, ring * std::cos(angle), ring * std::sin(angle)));
  }
  for (int i = 0; i < 16; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / 16.0;
    l.boundary.push_back(offset(kCentre, 5000 * std::cos(angle), 5000 * std::sin(angle)));
  }
  return l;
}

std::string vertices(const std::vector<GeoPoint>& pts) {
  std::string s = "[";
  for (std::size_t i = 0; i < pts.size(); ++i)
    s += (i ? ", " : "") + std::string("[") + format_number(pts[i].latitude()) + ", " + format_number(pts[i].longitude()) + "]";
  return s + "]";
}

void write_geo(const Layout& l, std::ostream& out) {
  auto point = [](const std::string& name, const GeoPoint& p) {
    return "{\"name\": \"" + name + "\", \"lat\": " + format_number(p.latitude()) + ", \"lon\": " + format_number(p.longitude()) + "}";
  };
  out << "{\n  \"points\": [\n    " << point("centre", kCentre) << ",\n    " << point("park", l.park) << ",\n    "
      << point("market", l.market) << "\n  ],\n"
      << "  \"polylines\": [\n"
      << "    {\"name\": \"main_avenue\", \"vertices\": " << vertices(l.avenue1) << "},\n"
      << "    {\"name\": \"second_avenue\", \"vertices\": " << vertices(l.avenue2) << "},\n"
      << "    {\"name\": \"metro_line\", \"vertices\": " << vertices(l.metro) << "}\n  ],\n"
      << "  \"polygons\": [\n    {\"name\": \"city\", \"vertices\": " << vertices(l.boundary) << "}\n  ],\n"
      << "  \"centroids\": [\n";
  for (std::size_t i = 0; i < l.hoods.size(); ++i)
    out << "    " << point(l.hoods[i].first, l.hoods[i].second) << (i + 1 < l.hoods.size() ? ",\n" : "\n");
  out << "  ]\n}\n";
}

const char* yes(bool b) { return b ? "1" : "0"; }

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_fixture <out_dir> [rows] [seed]\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  const std::size_t rows = argc > 2 ? std::stoul(argv[2]) : 2400;
  Rng rng{std::mt19937_64(argc > 3 ? std::stoull(argv[3]) : 20240611ULL)};
  std::filesystem::create_directories(dir);

  const Layout l = make_layout();
  {
    std::ofstream geo(dir / "geo.json", std::ios::binary);
    write_geo(l, geo);
  }

  std::ofstream csv(dir / "listings.csv", std::ios::binary);
  csv << "ID,LAT,LON,PRICE_M2,AREA_M2,BUILD_AGE,MAX_FLOORS,FLOOR_NO,N_ROOMS,N_BATHS,DWELLINGS,"
         "PROPERTY_TYPE,CAD_QUALITY,STATUS,HAS_AC,HAS_LIFT,HAS_PARKING,HAS_POOL,HAS_GARDEN,HAS_TERRACE,"
         "HAS_STORAGE,HAS_WARDROBE,HAS_DOORMAN\n";
  for (std::size_t i = 0; i < rows; ++i) {
    // location: centre-heavy radial density; a few listings fall outside the boundary
    const bool outside = i % 160 == 7;
    const double radius = outside ? 5600.0 + 800.0 * rng.u() : 4600.0 * std::pow(rng.u(), 0.75);
    const double angle = 2.0 * std::numbers::pi * rng.u();
    const GeoPoint p = offset(kCentre, radius * std::cos(angle), radius * std::sin(angle));
    const double d_centre = bnlab::spatial::haversine(p, kCentre);
    const double d_av1 = bnlab::spatial::point_to_polyline_distance(p, {"main_avenue", l.avenue1});
    const double d_park = bnlab::spatial::haversine(p, l.park);

    const double age = std::max(0.0, 95.0 * std::exp(-d_centre / 1800.0) + 25.0 * rng.u() + 6.0 * rng.normal());
    const bool new_build = age < 4.0;
    const double area = std::exp(std::log(70.0 + 0.006 * d_centre) + 0.35 * rng.normal());
    const int rooms = std::clamp(static_cast<int>(std::lround(area / 28.0 + 0.6 * rng.normal())), 1, 8);
    const int baths = std::clamp(static_cast<int>(std::lround(rooms / 2.2 + 0.4 * rng.normal())), 1, 4);
    const int floors = std::clamp(static_cast<int>(std::lround(4.0 + 10.0 * std::exp(-age / 40.0) + 3.0 * rng.normal())), 1, 30);
    const int floor_no = static_cast<int>(rng.u() * (floors + 1));
    const int dwellings = floors * (2 + static_cast<int>(rng.u() * 5));
    const int quality = std::clamp(static_cast<int>(std::lround(5.0 - d_centre / 1500.0 + 1.5 * rng.normal())), 1, 9);
    const char* type = area < 45.0 && rng.chance(0.6) ? "Studio"
                       : floor_no == floors && rng.chance(0.5) ? "Penthouse"
                       : rng.chance(0.05) ? "Duplex" : "Standard";
    const char* status = new_build ? "New Construction"
                         : rng.chance(0.3) ? "Second Hand Renovation" : "Second Hand Good Condition";
    const bool lift = floors > 4 ? rng.chance(0.92) : rng.chance(0.35);
    const bool ac = rng.chance(age < 30 ? 0.8 : 0.45);
    const bool parking = rng.chance(std::min(0.85, 0.15 + d_centre / 6000.0));
    const bool pool = rng.chance(d_centre > 3000 ? 0.25 : 0.03);
    const bool garden = rng.chance(pool ? 0.5 : 0.05);
    const bool terrace = rng.chance(type[0] == 'P' ? 0.9 : 0.3);
    const bool storage = rng.chance(parking ? 0.6 : 0.2);
    const bool wardrobe = rng.chance(age < 40 ? 0.8 : 0.5);
    const bool doorman = rng.chance(quality >= 6 ? 0.55 : 0.08);

    double log_price = 8.1 - d_centre / 6000.0 - d_av1 / 9000.0 - d_park / 20000.0 + 0.07 * quality +
                       0.08 * lift - 0.0015 * age + 0.12 * new_build + 0.12 * rng.normal();
    if (i % 400 == 123) log_price += 3.0;  // asking-price typo, an outlier on the price scale

    std::string row = std::to_string(100000 + i) + "," + format_number(std::round(p.latitude() * 1e6) / 1e6) + "," +
                      format_number(std::round(p.longitude() * 1e6) / 1e6) + "," +
                      format_number(std::round(std::exp(log_price))) + ",";
    // a handful of listings are missing their surface
    row += (i % 300 == 42 ? std::string() : format_number(std::round(area))) + ",";
    row += format_number(std::round(age)) + "," + std::to_string(floors) + "," + std::to_string(floor_no) + "," +
           std::to_string(rooms) + "," + std::to_string(baths) + "," + std::to_string(dwellings) + "," + type +
           "," + std::to_string(quality) + "," + status + "," + yes(ac) + "," + yes(lift) + "," + yes(parking) +
           "," + yes(pool) + "," + yes(garden) + "," + yes(terrace) + "," + yes(storage) + "," + yes(wardrobe) +
           "," + yes(doorman);
    csv << row << '\n';
    if (i % 120 == 60) csv << row << '\n';  // relisted duplicate
  }
  std::cout << "wrote " << (dir / "listings.csv").string() << " and " << (dir / "geo.json").string() << '\n';
  return 0;
}
