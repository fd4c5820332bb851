#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "geoquery/inference/geodesy.hpp"
#include "geoquery/inference/predict.hpp"

namespace geoquery::inference {

/**
 * One JSON object per line:
 *
 *     {"id", "lat", "lon", "fine_class", "scene", "true_lat", "true_lon",
 *      "error_km", "hits": [street, city, region, country, continent]}
 */
std::string prediction_line(std::string_view id, const Prediction& p,
                            const geocell::GeoPoint& truth);

/// {"thresholds_km", "accuracy", "hits", "n"}.
nlohmann::json report_json(const EvalReport& report);

/// Two-line CSV table: header of scale names, then percentages.
std::string report_table(const EvalReport& report);

}  // namespace geoquery::inference
