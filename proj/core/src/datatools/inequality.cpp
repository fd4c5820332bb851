#include "geoquery/datatools/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace geoquery::datatools {

namespace {

std::vector<double> sorted_checked(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("need at least one value");
  std::vector<double> x(values.begin(), values.end());
  for (double v : x) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("values must be finite and nonnegative");
  }
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace

double gini(std::span<const double> values) {
  const auto x = sorted_checked(values);
  double total = 0.0;
  for (double v : x) total += v;
  if (total == 0.0) throw std::invalid_argument("gini is undefined for all-zero values");
  const auto n = static_cast<double>(x.size());
  double num = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    const double gap = x[k] - x[k - 1];
    if (gap != 0.0) num += gap * static_cast<double>(k) * (n - static_cast<double>(k));
  }
  return num / (n * total);
}

std::vector<LorenzPoint> lorenz(std::span<const double> values) {
  const auto x = sorted_checked(values);
  double total = 0.0;
  for (double v : x) total += v;
  const auto n = static_cast<double>(x.size());
  std::vector<LorenzPoint> curve;
  curve.reserve(x.size() + 1);
  curve.emplace_back(0.0, 0.0);
  double cum = 0.0;
  for (std::size_t k = 1; k <= x.size(); ++k) {
    cum += x[k - 1];
    const double share = total == 0.0 ? static_cast<double>(k) / n : cum / total;
    curve.emplace_back(static_cast<double>(k) / n, k == x.size() ? 1.0 : std::min(share, 1.0));
  }
  curve.back().first = 1.0;
  return curve;
}

double lorenz_gini(std::span<const LorenzPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += 0.5 * (curve[i].first - curve[i - 1].first) * (curve[i].second + curve[i - 1].second);
  }
  return 1.0 - 2.0 * area;
}

DistributionStats distribution_stats(std::vector<std::string> labels, std::vector<double> counts) {
  if (labels.size() != counts.size()) throw std::invalid_argument("labels and counts differ in length");
  DistributionStats s;
  s.lorenz = lorenz(counts);
  s.gini = gini(counts);
  s.labels = std::move(labels);
  s.counts = std::move(counts);
  return s;
}

std::map<std::string, std::size_t> counts_per_city(std::span<const ImageRecord> records) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    if (r.city) ++counts[*r.city];
  }
  return counts;
}

std::vector<std::vector<std::size_t>> heatmap_grid(std::span<const geocell::GeoPoint> points,
                                                   std::size_t lat_bins, std::size_t lon_bins) {
  if (lat_bins == 0 || lon_bins == 0) throw std::invalid_argument("heatmap needs at least one bin per axis");
  std::vector<std::vector<std::size_t>> grid(lat_bins, std::vector<std::size_t>(lon_bins, 0));
  const auto bin = [](double offset, double span, std::size_t bins) {
    const double f = std::floor(offset / span * static_cast<double>(bins));
    return std::min(static_cast<std::size_t>(std::max(f, 0.0)), bins - 1);
  };
  for (const auto& p : points) {
    ++grid[bin(p.lat_deg() + 90.0, 180.0, lat_bins)][bin(p.lon_deg() + 180.0, 360.0, lon_bins)];
  }
  return grid;
}

std::string heatmap_csv(const std::vector<std::vector<std::size_t>>& grid) {
  std::string out = "row,col,lat_min,lat_max,lon_min,lon_max,count\n";
  const auto rows = grid.size();
  char buf[160];
  for (std::size_t r = 0; r < rows; ++r) {
    const auto cols = grid[r].size();
    for (std::size_t c = 0; c < cols; ++c) {
      const double lat0 = -90.0 + 180.0 * static_cast<double>(r) / static_cast<double>(rows);
      const double lat1 = -90.0 + 180.0 * static_cast<double>(r + 1) / static_cast<double>(rows);
      const double lon0 = -180.0 + 360.0 * static_cast<double>(c) / static_cast<double>(cols);
      const double lon1 = -180.0 + 360.0 * static_cast<double>(c + 1) / static_cast<double>(cols);
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.6f,%.6f,%.6f,%.6f,%zu\n", r, c, lat0, lat1, lon0, lon1,
                    grid[r][c]);
      out += buf;
    }
  }
  return out;
}

}  // namespace geoquery::datatools
