#pragma once

#include <cstdint>
#include <vector>

#include "contagion/graph.hpp"

namespace contagion {

// Stochastic block model: every unordered pair (i, j), i != j, is an edge
// independently with probability probs[block_of[i]][block_of[j]].
struct BlockModelSpec {
  std::size_t n = 0;
  std::vector<std::uint32_t> block_of;
  std::vector<std::vector<double>> probs;

  std::size_t num_blocks() const { return probs.size(); }

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

// num_blocks contiguous blocks of (near) equal size; p_in on the diagonal,
// p_out elsewhere.
BlockModelSpec planted_partition(std::size_t n, std::size_t num_blocks,
                                 double p_in, double p_out);

// Planted partition calibrated so that the expected degree is mean_degree and
// a fraction `within_fraction` of each node's expected edges stay inside its
// own block. With fixed mean_degree this gives the sparse p = c/n regime.
BlockModelSpec planted_partition_by_degree(std::size_t n, std::size_t num_blocks,
                                           double mean_degree,
                                           double within_fraction);

Graph sbm_generate(const BlockModelSpec& spec, std::uint64_t seed);

}  // namespace contagion
