#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "geoquery/decoder/geo_decoder.hpp"
#include "geoquery/decoder/synthetic.hpp"
#include "geoquery/decoder/training.hpp"
#include "geoquery/geocell/partition.hpp"

namespace geoquery::decoder {

/// A labelled synthetic problem: samples, the partition built on their
/// locations, and training examples with complete label chains.
struct SyntheticProblem {
  std::vector<SyntheticSample> samples;
  geocell::PartitionStack partition;
  std::vector<Example> examples;
};

/// Builds the partition from the sample locations and keeps only samples
/// whose label chain is complete.
SyntheticProblem make_synthetic_problem(const SyntheticSpec& spec,
                                        std::span<const std::int64_t> t_max,
                                        std::int64_t t_min);

/// Image-encoder model sized for a synthetic problem.
ModelConfig synthetic_model_config(const SyntheticProblem& problem, const SyntheticSpec& spec,
                                   std::size_t patch_size, std::uint64_t seed);

}  // namespace geoquery::decoder
