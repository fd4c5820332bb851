#include "geoquery/decoder/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace geoquery::decoder {

std::vector<geocell::GeoPoint> synthetic_centres(std::size_t clusters) {
  std::vector<geocell::GeoPoint> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < clusters; ++k) {
    // z in (-0.8, 0.8) keeps centres off the poles.
    const double z = 0.8 * (1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(clusters));
    const double lat = std::asin(z) * 180.0 / std::numbers::pi;
    const double lon = std::fmod(golden * static_cast<double>(k), 2.0 * std::numbers::pi) * 180.0 /
                       std::numbers::pi;
    out.emplace_back(lat, lon);
  }
  return out;
}

std::vector<SyntheticSample> make_synthetic(const SyntheticSpec& spec) {
  if (spec.clusters == 0 || spec.scenes == 0 || spec.image_size == 0 || spec.channels == 0) {
    throw std::invalid_argument("synthetic spec needs positive cluster, scene, size and channel counts");
  }
  const auto centres = synthetic_centres(spec.clusters);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = spec.image_size;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<SyntheticSample> out;
  out.reserve(spec.images);
  for (std::size_t k = 0; k < spec.images; ++k) {
    SyntheticSample s;
    s.cluster = k % spec.clusters;
    s.scene = (k / spec.clusters) % spec.scenes;
    const auto& c = centres[s.cluster];
    const double lat = std::clamp(c.lat_deg() + spec.spread_deg * gauss(rng), -89.0, 89.0);
    s.location = geocell::GeoPoint(lat, c.lon_deg() + spec.spread_deg * gauss(rng));

    const double fx = 1.0 + static_cast<double>(s.cluster % 3);
    const double fy = 1.0 + static_cast<double>(s.cluster / 3 % 3);
    // Scene k tilts a brightness ramp towards angle 2πk/S.
    const double angle = two_pi * static_cast<double>(s.scene) / static_cast<double>(spec.scenes);
    std::vector<numerics::Scalar> px(spec.channels * n * n);
    for (std::size_t ch = 0; ch < spec.channels; ++ch) {
      const double phase = two_pi * static_cast<double>(ch) / static_cast<double>(spec.channels);
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
          const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(n);
          const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(n);
          const double ramp = std::cos(angle) * (2.0 * v - 1.0) + std::sin(angle) * (2.0 * u - 1.0);
          const double value = std::sin(two_pi * (fx * u + fy * v) + phase) + 0.5 * ramp +
                               spec.noise * gauss(rng);
          px[(ch * n + y) * n + x] = static_cast<numerics::Scalar>(value);
        }
      }
    }
    s.image = numerics::Tensor::from({spec.channels, n, n}, std::move(px));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace geoquery::decoder
