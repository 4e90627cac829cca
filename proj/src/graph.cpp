#include "contagion/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "contagion/rng.hpp"

namespace contagion {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges,
                        BuildStats* stats) {
  if (n >= std::numeric_limits<NodeId>::max()) {
    throw std::invalid_argument("graph: node count exceeds NodeId range");
  }
  BuildStats local;
  std::vector<Edge> directed;
  directed.reserve(2 * edges.size());
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) {
      throw std::out_of_range("graph: edge endpoint out of range");
    }
    if (a == b) {
      ++local.self_loops_dropped;
      continue;
    }
    directed.emplace_back(a, b);
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());
  const auto before = directed.size();
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  local.duplicates_collapsed = (before - directed.size()) / 2;

  Graph g;
  g.offsets_.assign(n + 1, 0);
  for (const auto& e : directed) ++g.offsets_[e.first + 1];
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.targets_.reserve(directed.size());
  for (const auto& e : directed) g.targets_.push_back(e.second);

  if (stats != nullptr) *stats = local;
  return g;
}

std::span<const NodeId> Graph::neighbors(NodeId i) const {
  if (i >= num_nodes()) throw std::out_of_range("graph: node id out of range");
  return {targets_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::size_t Graph::degree(NodeId i) const {
  if (i >= num_nodes()) throw std::out_of_range("graph: node id out of range");
  return offsets_[i + 1] - offsets_[i];
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId i = 0; i < num_nodes(); ++i) {
    for (NodeId j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::string Graph::check_invariants() const {
  const std::size_t n = num_nodes();
  if (offsets_.front() != 0) return "offsets[0] != 0";
  for (std::size_t i = 0; i < n; ++i) {
    if (offsets_[i] > offsets_[i + 1]) return "offsets not monotone";
  }
  if (offsets_[n] != targets_.size()) return "offsets[n] != targets size";
  if (targets_.size() % 2 != 0) return "odd number of directed entries";
  for (NodeId i = 0; i < n; ++i) {
    const auto nb = neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] >= n) return "neighbor id out of range at node " + std::to_string(i);
      if (nb[k] == i) return "self-loop at node " + std::to_string(i);
      if (k > 0 && nb[k - 1] >= nb[k]) {
        return "neighbor list not strictly ascending at node " + std::to_string(i);
      }
      if (!has_edge(nb[k], i)) {
        return "asymmetric edge " + std::to_string(i) + "-" + std::to_string(nb[k]);
      }
    }
  }
  return {};
}

Graph Graph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != num_nodes()) {
    throw std::invalid_argument("graph: permutation size mismatch");
  }
  auto edges = edge_list();
  for (auto& [a, b] : edges) {
    a = perm[a];
    b = perm[b];
  }
  return from_edges(num_nodes(), edges);
}

std::string GraphSummary::to_string() const {
  std::ostringstream os;
  os << "n=" << n << " m=" << m << " min_degree=" << min_degree
     << " mean_degree=" << mean_degree << " max_degree=" << max_degree;
  return os.str();
}

GraphSummary summarize(const Graph& g) {
  GraphSummary s;
  s.n = g.num_nodes();
  s.m = g.num_edges();
  if (s.n == 0) return s;
  s.min_degree = std::numeric_limits<std::size_t>::max();
  for (NodeId i = 0; i < s.n; ++i) {
    const auto d = g.degree(i);
    s.min_degree = std::min(s.min_degree, d);
    s.max_degree = std::max(s.max_degree, d);
  }
  s.mean_degree = 2.0 * static_cast<double>(s.m) / static_cast<double>(s.n);
  return s;
}

std::size_t degree(const Graph& g, NodeId i) { return g.degree(i); }

namespace {

bool parse_id(std::string_view tok, std::uint64_t& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

LoadedGraph read_edge_list(std::istream& in) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (a.front() == '#') continue;
    if (!(ls >> b)) throw ParseError(line_no, "expected two node ids");
    if (ls >> extra) throw ParseError(line_no, "unexpected trailing token '" + extra + "'");
    std::uint64_t u = 0, v = 0;
    if (!parse_id(a, u) || !parse_id(b, v)) {
      throw ParseError(line_no, "node ids must be nonnegative integers");
    }
    raw.emplace_back(u, v);
  }

  LoadedGraph out;
  for (const auto& [u, v] : raw) {
    out.original_ids.push_back(u);
    out.original_ids.push_back(v);
  }
  std::sort(out.original_ids.begin(), out.original_ids.end());
  out.original_ids.erase(std::unique(out.original_ids.begin(), out.original_ids.end()),
                         out.original_ids.end());
  auto dense = [&](std::uint64_t id) {
    return static_cast<NodeId>(
        std::lower_bound(out.original_ids.begin(), out.original_ids.end(), id) -
        out.original_ids.begin());
  };
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& [u, v] : raw) edges.emplace_back(dense(u), dense(v));

  Graph::BuildStats stats;
  out.graph = Graph::from_edges(out.original_ids.size(), edges, &stats);
  out.self_loops_dropped = stats.self_loops_dropped;
  out.duplicates_collapsed = stats.duplicates_collapsed;
  return out;
}

LoadedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  for (const auto& [a, b] : g.edge_list()) out << a << ' ' << b << '\n';
}

void save_edge_list(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list '" + path + "'");
  write_edge_list(out, g);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

namespace {

bool share_neighbor(std::span<const NodeId> a, std::span<const NodeId> b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

double shared_neighbor_probability(const Graph& g, std::size_t pair_sample_size,
                                   std::uint64_t seed) {
  const std::size_t n = g.num_nodes();
  if (n < 2) throw std::invalid_argument("shared_neighbor_probability: need n >= 2");
  const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);

  if (total_pairs <= static_cast<double>(pair_sample_size)) {
    // Exact: count distinct two-hop partners j > i of each node i.
    std::vector<std::size_t> stamp(n, std::numeric_limits<std::size_t>::max());
    std::size_t sharing = 0;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId k : g.neighbors(i)) {
        for (NodeId j : g.neighbors(k)) {
          if (j > i && stamp[j] != i) {
            stamp[j] = i;
            ++sharing;
          }
        }
      }
    }
    return static_cast<double>(sharing) / total_pairs;
  }

  if (pair_sample_size == 0) {
    throw std::invalid_argument("shared_neighbor_probability: pair_sample_size must be > 0");
  }
  Rng rng(seed);
  std::uniform_int_distribution<NodeId> first(0, static_cast<NodeId>(n - 1));
  std::uniform_int_distribution<NodeId> second(0, static_cast<NodeId>(n - 2));
  std::size_t sharing = 0;
  for (std::size_t s = 0; s < pair_sample_size; ++s) {
    const NodeId i = first(rng);
    NodeId j = second(rng);
    if (j >= i) ++j;
    if (share_neighbor(g.neighbors(i), g.neighbors(j))) ++sharing;
  }
  return static_cast<double>(sharing) / static_cast<double>(pair_sample_size);
}

}  // namespace contagion
