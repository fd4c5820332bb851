#include "geoquery/inference/report.hpp"

#include <cstdio>

namespace geoquery::inference {

std::string prediction_line(std::string_view id, const Prediction& p,
                            const geocell::GeoPoint& truth) {
  const double error = haversine_km(p.point, truth);
  const auto hits = threshold_hits(error);
  nlohmann::json j = {{"id", id},
                      {"lat", p.point.lat_deg()},
                      {"lon", p.point.lon_deg()},
                      {"fine_class", p.fine_class},
                      {"scene", p.scene},
                      {"true_lat", truth.lat_deg()},
                      {"true_lon", truth.lon_deg()},
                      {"error_km", error},
                      {"hits", hits}};
  return j.dump();
}

nlohmann::json report_json(const EvalReport& r) {
  return {{"thresholds_km", r.thresholds_km}, {"accuracy", r.accuracy}, {"hits", r.hits}, {"n", r.n}};
}

std::string report_table(const EvalReport& r) {
  std::string out = "street_1km,city_25km,region_200km,country_750km,continent_2500km,n\n";
  char buf[32];
  for (double a : r.accuracy) {
    std::snprintf(buf, sizeof(buf), "%.2f,", 100.0 * a);
    out += buf;
  }
  out += std::to_string(r.n) + "\n";
  return out;
}

}  // namespace geoquery::inference
