#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cxhyp {

using NodeId = int32_t;

// Directed relation edge: child IS-A parent.
struct Edge {
  NodeId child = 0;
  NodeId parent = 0;
  bool operator==(const Edge&) const = default;
};

// Node-labelled directed graph. Edges are deduplicated, keep first-appearance
// order, and never contain self-loops. The adjacency index is undirected:
// for ranking and sampling purposes a pair is "related" whichever way the
// edge points.
class Graph {
 public:
  Graph() = default;
  Graph(std::vector<std::string> tokens, std::vector<Edge> edges);

  int64_t node_count() const { return static_cast<int64_t>(tokens_.size()); }
  int64_t edge_count() const { return static_cast<int64_t>(edges_.size()); }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(NodeId v) const { return tokens_[v]; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::optional<NodeId> id_of(const std::string& token) const;

  // Directed membership.
  bool has_edge(NodeId child, NodeId parent) const;
  // Undirected relation test.
  bool adjacent(NodeId u, NodeId v) const;
  // Sorted undirected neighbour list of v.
  const std::vector<NodeId>& neighbors(NodeId v) const {
    return adjacency_[v];
  }
  int64_t degree(NodeId v) const {
    return static_cast<int64_t>(adjacency_[v].size());
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::unordered_map<std::string, NodeId> token_ids_;
  std::unordered_set<uint64_t> edge_keys_;
};

// Reads a TSV edge list (child <TAB> parent per line). Tokens are interned
// in first-appearance order: child before parent, line by line. Malformed
// and self-loop lines raise std::runtime_error naming the line number.
Graph load_edge_list(const std::string& path);

// Same parsing, but keeps the raw token pairs (callers that need to build
// the graph over an existing vocabulary).
std::vector<std::pair<std::string, std::string>> load_edge_pairs(
    const std::string& path);

// Writes the graph back out in the same TSV format, edge order preserved.
void save_edge_list(const Graph& g, const std::string& path);

// Builds a graph from (child, parent) token pairs, interning tokens in
// first-appearance order and deduplicating repeated pairs.
Graph graph_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs);

// Transitive closure of a DAG: an edge (u, v) for every proper ancestor v
// of u, in ascending (u, v) order. Throws std::runtime_error describing one
// offending cycle if the graph has any.
Graph transitive_closure(const Graph& g);

// Balanced tree of branching factor r >= 2 and depth h >= 1; every non-leaf
// node has exactly r children. Edges point child -> parent. Tokens are
// "n0" (root), "n1", ... in breadth-first order.
Graph balanced_tree(int r, int h);

// Union of k uniform random labelled trees on the same m nodes (Pruefer
// decoding), each edge stored canonically as (min, max). Duplicate edges
// across trees collapse. Tokens are "n0" .. "n<m-1>".
Graph compressed_graph(int m, int k, uint64_t seed);

struct SplitSpec {
  double train_frac = 0.90;
  double valid_frac = 0.05;
  double test_frac = 0.05;
  uint64_t seed = 0;
};

struct EdgeSplit {
  std::vector<Edge> train, valid, test;
};

// Randomly partitions the edges so that every node incident to a held-out
// edge still appears in some training edge. Throws std::runtime_error when
// no such split exists (e.g. too few edges per node for the requested
// fractions).
EdgeSplit split_edges(const Graph& g, const SplitSpec& spec);

// All-pairs shortest path lengths over the undirected view of g, BFS from
// every node. dist[u*m + v]; unreachable pairs are -1.
std::vector<int32_t> bfs_all_pairs(const Graph& g, int workers = 1);

// Four-point delta of the undirected graph metric: for each 4-tuple form the
// three pairings S1 = d(a,b)+d(c,d), S2 = d(a,c)+d(b,d), S3 = d(a,d)+d(b,c);
// the tuple's hyperbolicity is (largest - second largest), and delta is half
// the maximum over tuples. Trees give 0; a 4-cycle gives 1.
//
// Exact mode enumerates all tuples and refuses graphs with more than
// node_cap nodes (use sampling instead). Disconnected graphs raise
// std::runtime_error in either mode.
double delta_hyperbolicity_exact(const Graph& g, int node_cap = 1500,
                                 int workers = 1);
double delta_hyperbolicity_sampled(const Graph& g, int64_t samples,
                                   uint64_t seed, int workers = 1);

namespace detail {

double delta_scan_serial(const std::vector<int32_t>& dist, int64_t m);
double delta_scan_parallel(const std::vector<int32_t>& dist, int64_t m,
                           int workers);

}  // namespace detail

}  // namespace cxhyp
