#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace contagion {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Immutable undirected simple graph in compressed adjacency form. Neighbor
// lists are sorted and duplicate free, self-loops are never stored, and every
// edge is stored in both directions so offsets[n] == 2 * num_edges().
class Graph {
 public:
  Graph() : offsets_(1, 0) {}

  // Builds a graph on n nodes. Duplicate edges (in either orientation) are
  // collapsed and self-loops dropped; the counts are reported when requested.
  struct BuildStats {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_collapsed = 0;
  };
  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          BuildStats* stats = nullptr);

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t num_edges() const { return targets_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId i) const;
  std::size_t degree(NodeId i) const;
  bool has_edge(NodeId i, NodeId j) const;

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const NodeId> targets() const { return targets_; }

  // Each undirected edge once, as (i, j) with i < j, in ascending order.
  std::vector<Edge> edge_list() const;

  // Full scan of the structural invariants. Returns an empty string when the
  // graph is well formed, otherwise a description of the first violation.
  std::string check_invariants() const;

  // Relabels node i as perm[i].
  Graph permuted(std::span<const NodeId> perm) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
};

struct GraphSummary {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t min_degree = 0;
  double mean_degree = 0.0;
  std::size_t max_degree = 0;

  // Single-line record: "n=... m=... min_degree=... mean_degree=... max_degree=..."
  std::string to_string() const;
};

GraphSummary summarize(const Graph& g);

std::size_t degree(const Graph& g, NodeId i);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Result of reading a whitespace-separated edge list. Node ids are remapped
// to dense 0..n-1 in ascending order of the original ids; original_ids[k] is
// the id that dense node k had in the file.
struct LoadedGraph {
  Graph graph;
  std::vector<std::uint64_t> original_ids;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_collapsed = 0;
};

// Blank lines and lines starting with '#' are skipped.
LoadedGraph read_edge_list(std::istream& in);
LoadedGraph load_edge_list(const std::string& path);

void write_edge_list(std::ostream& out, const Graph& g);
void save_edge_list(const std::string& path, const Graph& g);

// Probability that a uniformly random pair of distinct nodes has at least one
// common neighbor. All C(n,2) pairs are enumerated when that count is at most
// pair_sample_size; otherwise pair_sample_size pairs are drawn with
// replacement.
double shared_neighbor_probability(const Graph& g,
                                   std::size_t pair_sample_size,
                                   std::uint64_t seed);

}  // namespace contagion
