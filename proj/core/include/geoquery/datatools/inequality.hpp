#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geoquery/datatools/records.hpp"
#include "geoquery/geocell/geo_point.hpp"

namespace geoquery::datatools {

/**
 * Gini coefficient, the mean absolute pairwise difference over twice the
 * mean:  sum_ij |x_i - x_j| / (2 n^2 mean).
 *
 * Evaluated through the sorted gaps d_k = x_(k+1) - x_(k), each of which
 * separates k values from n - k, so the double sum becomes
 * sum_k d_k k (n - k) / (n sum x). Equal inputs give exactly 0.
 * Throws std::invalid_argument for an empty, negative, non-finite or
 * all-zero input.
 */
double gini(std::span<const double> values);

using LorenzPoint = std::pair<double, double>;

/**
 * (0, 0) followed by (k/n, share of the k smallest values) for k = 1..n.
 * An all-zero input yields the diagonal. Throws std::invalid_argument for an
 * empty or negative input.
 */
std::vector<LorenzPoint> lorenz(std::span<const double> values);

/// 1 - 2 * (trapezoidal area under the curve).
double lorenz_gini(std::span<const LorenzPoint> curve);

struct DistributionStats {
  std::vector<std::string> labels;
  std::vector<double> counts;
  std::vector<LorenzPoint> lorenz;
  double gini = 0.0;
};

DistributionStats distribution_stats(std::vector<std::string> labels, std::vector<double> counts);

/// Images per city, keyed by the record's city (records without one are
/// skipped). Keys are sorted.
std::map<std::string, std::size_t> counts_per_city(std::span<const ImageRecord> records);

/**
 * Equirectangular occupancy grid, lat_bins rows by lon_bins columns. Row 0
 * starts at latitude -90, column 0 at longitude -180; latitude +90 falls into
 * the last row. Throws std::invalid_argument for zero bins.
 */
std::vector<std::vector<std::size_t>> heatmap_grid(std::span<const geocell::GeoPoint> points,
                                                   std::size_t lat_bins, std::size_t lon_bins);

/// "row,col,lat_min,lat_max,lon_min,lon_max,count" lines after a header.
std::string heatmap_csv(const std::vector<std::vector<std::size_t>>& grid);

}  // namespace geoquery::datatools
