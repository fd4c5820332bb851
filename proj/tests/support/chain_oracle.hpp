#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "geoquery/geocell/partition.hpp"
#include "point_sets.hpp"

namespace geoquery::testing {

/// Random stack with 1..max_hierarchies levels and at most max_fine finest
/// classes, built from a clustered point cloud.
inline geocell::PartitionStack random_small_stack(std::mt19937_64& rng, std::size_t max_fine = 100,
                                                  std::size_t max_hierarchies = 5) {
  std::uniform_int_distribution<std::size_t> levels(1, max_hierarchies);
  std::uniform_int_distribution<std::size_t> size(20, 400);
  std::uniform_int_distribution<std::int64_t> t_min_dist(1, 4);
  for (;;) {
    const auto h = levels(rng);
    const auto points = clustered_points(rng, size(rng));
    const auto t_min = t_min_dist(rng);
    // Strictly decreasing thresholds ending at a random finest t_max.
    std::uniform_int_distribution<std::int64_t> finest(t_min, t_min + 30);
    std::vector<std::int64_t> t_max{finest(rng)};
    std::uniform_int_distribution<std::int64_t> step(1, 60);
    while (t_max.size() < h) t_max.push_back(t_max.back() + step(rng));
    std::reverse(t_max.begin(), t_max.end());
    auto stack = geocell::build_stack(points, t_max, t_min);
    if (stack.finest().size() > 0 && stack.finest().size() <= max_fine) return stack;
  }
}

/// Positive per-hierarchy distributions; a quarter of the draws come from a
/// small discrete set so exact ties occur.
inline std::vector<std::vector<double>> random_probabilities(const geocell::PartitionStack& stack,
                                                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::uniform_int_distribution<int> small(1, 3);
  const bool tied = std::uniform_int_distribution<int>(0, 3)(rng) == 0;
  std::vector<std::vector<double>> out;
  for (const auto& h : stack.hierarchies) {
    std::vector<double> p(h.size());
    double total = 0.0;
    for (auto& v : p) {
      v = tied ? static_cast<double>(small(rng)) : u(rng);
      total += v;
    }
    for (auto& v : p) v /= total;
    out.push_back(std::move(p));
  }
  return out;
}

/**
 * Enumerates every coarse-to-fine chain using cell containment alone (no
 * parent maps) and returns the finest class of the highest-product chain,
 * lowest finest index on ties. Products are taken finest-first to match the
 * rounding of the production code.
 */
inline std::size_t brute_force_chain_argmax(const geocell::PartitionStack& stack,
                                            const std::vector<std::vector<double>>& probs) {
  const auto depth = stack.depth();
  std::vector<std::size_t> chain;
  double best_score = -1.0;
  std::size_t best_fine = 0;
  auto visit = [&](auto&& self, std::size_t level) -> void {
    if (level == depth) {
      double score = probs[depth - 1][chain.back()];
      for (std::size_t k = depth - 1; k-- > 0;) score *= probs[k][chain[k]];
      const auto fine = chain.back();
      if (score > best_score || (score == best_score && fine < best_fine)) {
        best_score = score;
        best_fine = fine;
      }
      return;
    }
    const auto& classes = stack.hierarchies[level].classes;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (level > 0) {
        const auto& parent = stack.hierarchies[level - 1].classes[chain.back()];
        if (!parent.is_ancestor_or_equal_of(classes[c])) continue;
      }
      chain.push_back(c);
      self(self, level + 1);
      chain.pop_back();
    }
  };
  visit(visit, 0);
  return best_fine;
}

}  // namespace geoquery::testing
