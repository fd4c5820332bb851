#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "geoquery/geocell/geo_point.hpp"
#include "geoquery/numerics/tensor.hpp"

namespace geoquery::decoder {

/**
 * Toy geolocation data: locations jittered around well separated cluster
 * centres, each image a sinusoidal texture keyed by its cluster with a
 * brightness ramp keyed by its scene, plus Gaussian pixel noise. Pixels are
 * roughly zero-mean with unit scale, like normalized photographs.
 */
struct SyntheticSpec {
  std::size_t images = 64;
  std::size_t clusters = 4;
  std::size_t scenes = 2;
  std::size_t image_size = 16;
  std::size_t channels = 3;
  double noise = 0.1;
  /// Angular jitter of locations around their cluster centre.
  double spread_deg = 0.5;
  std::uint64_t seed = 0;
};

struct SyntheticSample {
  geocell::GeoPoint location;
  std::size_t cluster = 0;
  std::size_t scene = 0;
  /// [channels × image_size × image_size].
  numerics::Tensor image;
};

/// Image k belongs to cluster k mod clusters and scene (k / clusters) mod scenes.
std::vector<SyntheticSample> make_synthetic(const SyntheticSpec& spec);

/// Cluster centres: a Fibonacci lattice away from the poles.
std::vector<geocell::GeoPoint> synthetic_centres(std::size_t clusters);

}  // namespace geoquery::decoder
