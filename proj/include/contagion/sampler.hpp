#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "contagion/graph.hpp"
#include "contagion/rng.hpp"

namespace contagion {

struct SamplerConfig {
  std::size_t walk_length = 40;
  std::size_t negatives_per_positive = 5;
  // Walk positions k and k + o for o in [1, window] form a positive pair;
  // window 1 keeps only consecutive pairs, which are always true edges.
  std::size_t window = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// One draw of the subgraph sampler: the walk's distinct vertices in order of
// first visit, the consecutive walk pairs (true edges, with multiplicity) and
// the negative pairs paired with them.
struct SubgraphSample {
  std::vector<NodeId> vertices;
  std::vector<Edge> positives;
  std::vector<Edge> negatives;
};

// Simple random walk of `length` steps; returns length + 1 vertices.
std::vector<NodeId> random_walk(const Graph& g, NodeId start, std::size_t length, Rng& rng);
std::vector<NodeId> random_walk(const Graph& g, NodeId start, std::size_t length,
                                std::uint64_t seed);

// Random-walk sampler with uniform negative sampling. Holds a reference to
// the graph and a private RNG stream; not shareable across threads, but any
// number of samplers may read the same graph concurrently.
class RandomWalkSampler {
 public:
  RandomWalkSampler(const Graph& g, const SamplerConfig& cfg, std::uint64_t seed);

  // Start vertex uniform over non-isolated nodes; for every positive (i, j)
  // the sampler emits negatives (i, u) with u uniform over nodes other than i.
  // Edge membership of negatives is not checked.
  SubgraphSample next();

 private:
  const Graph& graph_;
  SamplerConfig cfg_;
  Rng rng_;
  std::vector<NodeId> starts_;
};

SubgraphSample sample_subgraph(const Graph& g, const SamplerConfig& cfg, std::uint64_t seed);

// Empirical visit distribution over `walks` walks of cfg.walk_length steps,
// each started uniformly over non-isolated nodes. Every step's arrival vertex
// is counted; the result sums to 1.
std::vector<double> visit_frequencies(const Graph& g, std::size_t walks,
                                      const SamplerConfig& cfg, std::uint64_t seed);

// Debug dump: "kind,i,j" rows with kind in {vertex, positive, negative}.
void write_sample_csv(std::ostream& out, const SubgraphSample& s);

}  // namespace contagion
