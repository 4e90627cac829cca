#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "contagion/graph.hpp"
#include "contagion/sampler.hpp"

using namespace contagion;

namespace {

Graph make(std::size_t n, std::vector<Edge> edges) { return Graph::from_edges(n, edges); }

Graph complete(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make(n, e);
}

Graph petersen() {
  return make(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                   {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
                   {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5}});
}

SamplerConfig config(std::size_t walk_length, std::size_t negatives) {
  SamplerConfig c;
  c.walk_length = walk_length;
  c.negatives_per_positive = negatives;
  return c;
}

}  // namespace

TEST(Sampler, SingleStepWalk) {
  const auto s = sample_subgraph(petersen(), config(1, 5), 3);
  EXPECT_EQ(s.positives.size(), 1u);
  EXPECT_EQ(s.negatives.size(), 5u);
}

TEST(Sampler, PairsAreValid) {
  const auto g = petersen();
  RandomWalkSampler sampler(g, config(40, 3), 11);
  for (int k = 0; k < 50; ++k) {
    const auto s = sampler.next();
    ASSERT_EQ(s.positives.size(), 40u);
    ASSERT_EQ(s.negatives.size(), 120u);
    std::set<NodeId> verts(s.vertices.begin(), s.vertices.end());
    EXPECT_EQ(verts.size(), s.vertices.size());
    for (const auto& [i, j] : s.positives) {
      EXPECT_TRUE(g.has_edge(i, j));
      EXPECT_TRUE(verts.count(i) && verts.count(j));
    }
    for (const auto& [i, j] : s.negatives) {
      EXPECT_NE(i, j);
      EXPECT_TRUE(verts.count(i));
      EXPECT_LT(j, g.num_nodes());
    }
  }
}

TEST(Sampler, ConsecutivePositivesFormAWalk) {
  const auto s = sample_subgraph(petersen(), config(20, 1), 5);
  EXPECT_EQ(s.vertices.front(), s.positives.front().first);
  for (std::size_t k = 1; k < s.positives.size(); ++k) {
    EXPECT_EQ(s.positives[k].first, s.positives[k - 1].second);
  }
}

TEST(Sampler, CompleteGraphOrderedEdgesNearUniform) {
  const auto g = complete(4);
  std::map<Edge, std::size_t> counts;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (const auto& p : sample_subgraph(g, config(100, 1), seed).positives) {
      ++counts[p];
      ++total;
    }
  }
  ASSERT_EQ(counts.size(), 12u);
  const double expected = static_cast<double>(total) / 12;
  for (const auto& [edge, c] : counts) {
    EXPECT_NEAR(static_cast<double>(c), expected, 0.3 * expected);
  }
}

TEST(Sampler, NegativesUniformOverOtherNodes) {
  const auto g = complete(5);
  std::vector<std::size_t> hits(5, 0);
  std::size_t total = 0;
  RandomWalkSampler sampler(g, config(50, 4), 2);
  for (int k = 0; k < 200; ++k) {
    for (const auto& [i, u] : sampler.next().negatives) {
      ++hits[u];
      ++total;
    }
  }
  for (auto h : hits) EXPECT_NEAR(static_cast<double>(h) / total, 0.2, 0.01);
}

TEST(Sampler, WindowAddsLongerRangePairs) {
  SamplerConfig c = config(10, 1);
  c.window = 3;
  const auto s = sample_subgraph(complete(6), c, 4);
  // Every walk position pairs with up to three successors; repeated vertices are skipped.
  EXPECT_GT(s.positives.size(), 10u);
  EXPECT_LE(s.positives.size(), 10u + 9u + 8u);
  for (const auto& [i, j] : s.positives) EXPECT_NE(i, j);
}

TEST(Sampler, Deterministic) {
  const auto a = sample_subgraph(petersen(), config(30, 2), 8);
  const auto b = sample_subgraph(petersen(), config(30, 2), 8);
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_EQ(a.positives, b.positives);
  EXPECT_EQ(a.negatives, b.negatives);
}

TEST(Sampler, StartsAvoidIsolatedNodes) {
  const auto g = make(5, {{1, 2}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = sample_subgraph(g, config(3, 1), seed);
    EXPECT_TRUE(s.vertices.front() == 1 || s.vertices.front() == 2);
  }
}

TEST(Sampler, Errors) {
  EXPECT_THROW(config(0, 1).validate(), std::invalid_argument);
  EXPECT_THROW(config(1, 0).validate(), std::invalid_argument);
  EXPECT_THROW(RandomWalkSampler(make(3, {}), config(5, 1), 1), std::invalid_argument);
  EXPECT_THROW(random_walk(make(3, {{0, 1}}), 2, 1, 1), std::invalid_argument);
  EXPECT_EQ(random_walk(make(3, {{0, 1}}), 2, 0, 1), std::vector<NodeId>{2});
}

TEST(VisitFrequencies, RegularGraphUniform) {
  const auto f = visit_frequencies(petersen(), 2500, config(40, 1), 6);
  for (double x : f) EXPECT_NEAR(x, 0.1, 0.01);
}

TEST(VisitFrequencies, StarCenterHalf) {
  const auto star = make(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
  const auto f = visit_frequencies(star, 2500, config(40, 1), 6);
  EXPECT_GE(f[0], 0.45);
  EXPECT_LE(f[0], 0.55);
}

TEST(Sampler, CsvDump) {
  const auto s = sample_subgraph(make(2, {{0, 1}}), config(1, 1), 1);
  std::ostringstream out;
  write_sample_csv(out, s);
  EXPECT_EQ(out.str().rfind("kind,i,j\n", 0), 0u);
  EXPECT_NE(out.str().find("positive,"), std::string::npos);
}
