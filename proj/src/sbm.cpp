#include "contagion/sbm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "contagion/rng.hpp"

namespace contagion {

void BlockModelSpec::validate() const {
  if (block_of.size() != n) {
    throw std::invalid_argument("sbm: block_of has " + std::to_string(block_of.size()) +
                                " entries, expected n=" + std::to_string(n));
  }
  const std::size_t k = probs.size();
  if (k == 0 && n > 0) throw std::invalid_argument("sbm: empty probability matrix");
  for (std::size_t a = 0; a < k; ++a) {
    if (probs[a].size() != k) throw std::invalid_argument("sbm: probability matrix not square");
    for (std::size_t b = 0; b < k; ++b) {
      const double p = probs[a][b];
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("sbm: probability outside [0,1]");
      }
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (probs[a][b] != probs[b][a]) {
        throw std::invalid_argument("sbm: probability matrix not symmetric");
      }
    }
  }
  for (auto b : block_of) {
    if (b >= k) throw std::invalid_argument("sbm: node assigned to unknown block");
  }
}

BlockModelSpec planted_partition(std::size_t n, std::size_t num_blocks, double p_in,
                                 double p_out) {
  if (num_blocks == 0) throw std::invalid_argument("sbm: num_blocks must be >= 1");
  BlockModelSpec spec;
  spec.n = n;
  spec.block_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    spec.block_of[i] = static_cast<std::uint32_t>(i * num_blocks / n);
  }
  spec.probs.assign(num_blocks, std::vector<double>(num_blocks, p_out));
  for (std::size_t a = 0; a < num_blocks; ++a) spec.probs[a][a] = p_in;
  return spec;
}

BlockModelSpec planted_partition_by_degree(std::size_t n, std::size_t num_blocks,
                                           double mean_degree, double within_fraction) {
  if (num_blocks == 0 || n < 2 * num_blocks) {
    throw std::invalid_argument("sbm: need at least two nodes per block");
  }
  if (!(within_fraction >= 0.0 && within_fraction <= 1.0)) {
    throw std::invalid_argument("sbm: within_fraction must lie in [0,1]");
  }
  const double block_size = static_cast<double>(n) / static_cast<double>(num_blocks);
  const double p_in = mean_degree * within_fraction / (block_size - 1.0);
  const double p_out =
      num_blocks == 1 ? 0.0
                      : mean_degree * (1.0 - within_fraction) /
                            (static_cast<double>(n) - block_size);
  if (p_in > 1.0 || p_out > 1.0) {
    throw std::invalid_argument("sbm: requested mean degree is too dense for n");
  }
  return planted_partition(n, num_blocks, p_in, p_out);
}

namespace {

// Number of failures before the next success of a Bernoulli(p) sequence.
std::uint64_t geometric_skip(Rng& rng, double log_q) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  const double skip = std::floor(std::log1p(-u) / log_q);
  if (skip >= 9.0e18) return UINT64_MAX / 2;
  return static_cast<std::uint64_t>(skip);
}

}  // namespace

Graph sbm_generate(const BlockModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t k = spec.num_blocks();
  std::vector<std::vector<NodeId>> members(k);
  for (NodeId i = 0; i < spec.n; ++i) members[spec.block_of[i]].push_back(i);

  Rng rng(seed);
  std::vector<Edge> edges;

  // Batagelj-Brandes style geometric skipping over each block pair's
  // candidate list, so the cost is proportional to the edge count.
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      const double p = spec.probs[a][b];
      const auto& ma = members[a];
      const auto& mb = members[b];
      const std::uint64_t total =
          a == b ? static_cast<std::uint64_t>(ma.size()) * (ma.size() - (ma.empty() ? 0 : 1)) / 2
                 : static_cast<std::uint64_t>(ma.size()) * mb.size();
      if (p <= 0.0 || total == 0) continue;

      auto emit = [&](std::uint64_t idx) {
        if (a == b) {
          // Row r holds pairs (r, 0..r-1); row r starts at r(r-1)/2.
          auto r = static_cast<std::uint64_t>(
              std::floor((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(idx))) / 2.0));
          while (r * (r - 1) / 2 > idx) --r;
          while ((r + 1) * r / 2 <= idx) ++r;
          const std::uint64_t c = idx - r * (r - 1) / 2;
          edges.emplace_back(ma[c], ma[r]);
        } else {
          edges.emplace_back(ma[idx / mb.size()], mb[idx % mb.size()]);
        }
      };

      if (p >= 1.0) {
        for (std::uint64_t idx = 0; idx < total; ++idx) emit(idx);
        continue;
      }
      const double log_q = std::log1p(-p);
      std::uint64_t idx = geometric_skip(rng, log_q);
      while (idx < total) {
        emit(idx);
        const std::uint64_t skip = geometric_skip(rng, log_q);
        if (skip >= total) break;
        idx += 1 + skip;
      }
    }
  }
  return Graph::from_edges(spec.n, edges);
}

}  // namespace contagion
