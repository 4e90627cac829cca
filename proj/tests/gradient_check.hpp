// Central finite-difference check of the analytic loss gradient, shared by
// the unit tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "contagion/graph.hpp"
#include "contagion/relerm.hpp"
#include "contagion/sampler.hpp"
#include "contagion/simulate.hpp"

namespace contagion::gradcheck {

struct GradientInstance {
  Graph graph;
  SubgraphSample sample;
  AggregatedTreatment v;
  OutcomeVector y;
  ModelParams params;
  double q = 1.0;
};

// |a - b| / max(|a|, |b|, 1)
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

// Random connected-ish graph on n <= max_n nodes, random parameters, outcomes
// with some undefined entries and some ineligible aggregates.
inline GradientInstance random_instance(std::uint64_t seed, std::size_t max_n,
                                        std::size_t max_d, double q) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_n(2, max_n), pick_d(1, max_d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  GradientInstance inst;
  inst.q = q;
  const std::size_t n = pick_n(rng), d = pick_d(rng);
  std::vector<Edge> edges;
  for (NodeId i = 1; i < n; ++i) edges.emplace_back(i - 1, i);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 2; j < n; ++j)
      if (unif(rng) < 0.3) edges.emplace_back(i, j);
  inst.graph = Graph::from_edges(n, edges);

  SamplerConfig sc;
  sc.walk_length = 1 + rng() % 6;
  sc.negatives_per_positive = 1 + rng() % 3;
  inst.sample = sample_subgraph(inst.graph, sc, rng());

  inst.params = ModelParams::initialize(n, d, 0.7, rng());
  inst.params.head.w_v = normal(rng);
  for (Eigen::Index k = 0; k < inst.params.head.w.size(); ++k) inst.params.head.w(k) = normal(rng);
  inst.params.head.b = normal(rng);

  inst.v.value.resize(n);
  inst.v.eligible.resize(n);
  inst.y.value.resize(n);
  inst.y.defined.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    inst.v.value[i] = unif(rng);
    inst.v.eligible[i] = unif(rng) < 0.85;
    inst.y.value[i] = 2.0 * normal(rng);
    inst.y.defined[i] = unif(rng) < 0.85;
  }
  return inst;
}

// Largest relative error over every touched embedding entry and every head
// parameter.
inline double max_gradient_error(const GradientInstance& inst, double h = 1e-5) {
  const Gradient grad = gradients(inst.sample, inst.v, inst.y, inst.params, inst.q);
  ModelParams p = inst.params;
  auto loss = [&]() { return batch_loss(inst.sample, inst.v, inst.y, p, inst.q).total; };
  auto central = [&](double& x) {
    const double saved = x;
    x = saved + h;
    const double up = loss();
    x = saved - h;
    const double down = loss();
    x = saved;
    return (up - down) / (2 * h);
  };

  double worst = 0.0;
  std::vector<NodeId> touched(inst.sample.vertices.begin(), inst.sample.vertices.end());
  for (const auto& [i, j] : inst.sample.negatives) touched.push_back(j);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (NodeId i : touched) {
    const Eigen::VectorXd analytic = grad.row(i);
    for (Eigen::Index k = 0; k < p.embeddings.cols(); ++k) {
      worst = std::max(worst, relative_error(analytic(k), central(p.embeddings(i, k))));
    }
  }
  worst = std::max(worst, relative_error(grad.w_v, central(p.head.w_v)));
  for (Eigen::Index k = 0; k < p.head.w.size(); ++k) {
    worst = std::max(worst, relative_error(grad.w(k), central(p.head.w(k))));
  }
  worst = std::max(worst, relative_error(grad.b, central(p.head.b)));
  return worst;
}

}  // namespace contagion::gradcheck
