#include "contagion/sampler.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace contagion {

void SamplerConfig::validate() const {
  if (walk_length < 1) throw std::invalid_argument("sampler: walk_length must be >= 1");
  if (window < 1) throw std::invalid_argument("sampler: window must be >= 1");
  if (negatives_per_positive < 1) {
    throw std::invalid_argument("sampler: negatives_per_positive must be >= 1");
  }
}

std::vector<NodeId> random_walk(const Graph& g, NodeId start, std::size_t length, Rng& rng) {
  if (start >= g.num_nodes()) throw std::out_of_range("random_walk: start out of range");
  std::vector<NodeId> walk;
  walk.reserve(length + 1);
  walk.push_back(start);
  NodeId cur = start;
  for (std::size_t s = 0; s < length; ++s) {
    const auto nb = g.neighbors(cur);
    if (nb.empty()) throw std::invalid_argument("random_walk: walk reached an isolated node");
    std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
    cur = nb[pick(rng)];
    walk.push_back(cur);
  }
  return walk;
}

std::vector<NodeId> random_walk(const Graph& g, NodeId start, std::size_t length,
                                std::uint64_t seed) {
  Rng rng(seed);
  return random_walk(g, start, length, rng);
}

RandomWalkSampler::RandomWalkSampler(const Graph& g, const SamplerConfig& cfg,
                                     std::uint64_t seed)
    : graph_(g), cfg_(cfg), rng_(seed) {
  cfg_.validate();
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    if (g.degree(i) > 0) starts_.push_back(i);
  }
  if (starts_.empty()) throw std::invalid_argument("sampler: graph has no edges");
}

SubgraphSample RandomWalkSampler::next() {
  std::uniform_int_distribution<std::size_t> pick_start(0, starts_.size() - 1);
  const auto walk = random_walk(graph_, starts_[pick_start(rng_)], cfg_.walk_length, rng_);

  SubgraphSample s;
  s.vertices.reserve(walk.size());
  for (NodeId v : walk) {
    if (std::find(s.vertices.begin(), s.vertices.end(), v) == s.vertices.end()) {
      s.vertices.push_back(v);
    }
  }
  const auto n = static_cast<NodeId>(graph_.num_nodes());
  std::uniform_int_distribution<NodeId> pick_other(0, n - 2);
  s.positives.reserve(walk.size() - 1);
  s.negatives.reserve((walk.size() - 1) * cfg_.negatives_per_positive);
  for (std::size_t k = 0; k + 1 < walk.size(); ++k) {
    const NodeId i = walk[k];
    for (std::size_t o = 1; o <= cfg_.window && k + o < walk.size(); ++o) {
      if (walk[k + o] == i) continue;
      s.positives.emplace_back(i, walk[k + o]);
      for (std::size_t r = 0; r < cfg_.negatives_per_positive; ++r) {
        NodeId u = pick_other(rng_);
        if (u >= i) ++u;
        s.negatives.emplace_back(i, u);
      }
    }
  }
  return s;
}

SubgraphSample sample_subgraph(const Graph& g, const SamplerConfig& cfg, std::uint64_t seed) {
  RandomWalkSampler sampler(g, cfg, seed);
  return sampler.next();
}

std::vector<double> visit_frequencies(const Graph& g, std::size_t walks,
                                      const SamplerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<NodeId> starts;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    if (g.degree(i) > 0) starts.push_back(i);
  }
  if (starts.empty()) throw std::invalid_argument("visit_frequencies: graph has no edges");
  if (walks == 0) throw std::invalid_argument("visit_frequencies: walks must be >= 1");

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
  std::vector<std::size_t> counts(g.num_nodes(), 0);
  for (std::size_t w = 0; w < walks; ++w) {
    const auto walk = random_walk(g, starts[pick_start(rng)], cfg.walk_length, rng);
    for (std::size_t k = 1; k < walk.size(); ++k) ++counts[walk[k]];
  }
  const double total = static_cast<double>(walks * cfg.walk_length);
  std::vector<double> freq(g.num_nodes());
  for (std::size_t i = 0; i < freq.size(); ++i) freq[i] = static_cast<double>(counts[i]) / total;
  return freq;
}

void write_sample_csv(std::ostream& out, const SubgraphSample& s) {
  out << "kind,i,j\n";
  for (NodeId v : s.vertices) out << "vertex," << v << ",\n";
  for (const auto& [i, j] : s.positives) out << "positive," << i << ',' << j << '\n';
  for (const auto& [i, j] : s.negatives) out << "negative," << i << ',' << j << '\n';
}

}  // namespace contagion
