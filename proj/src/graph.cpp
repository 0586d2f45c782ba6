#include "cxhyp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cxhyp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cxhyp {

namespace {

uint64_t edge_key(NodeId child, NodeId parent) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(child)) << 32) |
         static_cast<uint32_t>(parent);
}

}  // namespace

Graph::Graph(std::vector<std::string> tokens, std::vector<Edge> edges)
    : tokens_(std::move(tokens)) {
  NodeId m = static_cast<NodeId>(tokens_.size());
  token_ids_.reserve(tokens_.size());
  for (NodeId v = 0; v < m; ++v) {
    const std::string& t = tokens_[v];
    if (t.empty()) throw std::invalid_argument("Graph: empty token");
    if (t.find('\t') != std::string::npos ||
        t.find('\n') != std::string::npos ||
        t.find('\r') != std::string::npos)
      throw std::invalid_argument("Graph: token contains whitespace control character: " + t);
    if (!token_ids_.emplace(t, v).second)
      throw std::invalid_argument("Graph: duplicate token: " + t);
  }
  edges_.reserve(edges.size());
  adjacency_.assign(tokens_.size(), {});
  for (const Edge& e : edges) {
    if (e.child < 0 || e.child >= m || e.parent < 0 || e.parent >= m)
      throw std::invalid_argument("Graph: edge references unknown node");
    if (e.child == e.parent)
      throw std::invalid_argument("Graph: self-loop on node " +
                                  tokens_[e.child]);
    if (!edge_keys_.insert(edge_key(e.child, e.parent)).second) continue;
    edges_.push_back(e);
    adjacency_[e.child].push_back(e.parent);
    adjacency_[e.parent].push_back(e.child);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
}

std::optional<NodeId> Graph::id_of(const std::string& token) const {
  auto it = token_ids_.find(token);
  if (it == token_ids_.end()) return std::nullopt;
  return it->second;
}

bool Graph::has_edge(NodeId child, NodeId parent) const {
  return edge_keys_.count(edge_key(child, parent)) > 0;
}

bool Graph::adjacent(NodeId u, NodeId v) const {
  const auto& nbrs = adjacency_[u];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

Graph graph_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, NodeId> ids;
  auto intern = [&](const std::string& t) {
    auto it = ids.find(t);
    if (it != ids.end()) return it->second;
    NodeId v = static_cast<NodeId>(tokens.size());
    tokens.push_back(t);
    ids.emplace(t, v);
    return v;
  };
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [c, p] : pairs) {
    NodeId cv = intern(c);
    NodeId pv = intern(p);
    edges.push_back({cv, pv});
  }
  return Graph(std::move(tokens), std::move(edges));
}

std::vector<std::pair<std::string, std::string>> load_edge_pairs(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed line, expected child<TAB>parent");
    std::string child = line.substr(0, tab);
    std::string parent = line.substr(tab + 1);
    if (child == parent)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": self-loop on " + child);
    pairs.emplace_back(std::move(child), std::move(parent));
  }
  return pairs;
}

Graph load_edge_list(const std::string& path) {
  return graph_from_pairs(load_edge_pairs(path));
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  for (const Edge& e : g.edges())
    out << g.token(e.child) << '\t' << g.token(e.parent) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Graph transitive_closure(const Graph& g) {
  NodeId m = static_cast<NodeId>(g.node_count());
  std::vector<std::vector<NodeId>> parents(m);
  for (const Edge& e : g.edges()) parents[e.child].push_back(e.parent);

  // Cycle check, iterative DFS with a gray/black colouring.
  std::vector<int8_t> color(m, 0);
  std::vector<NodeId> path;
  for (NodeId root = 0; root < m; ++root) {
    if (color[root] != 0) continue;
    std::vector<std::pair<NodeId, size_t>> stack{{root, 0}};
    color[root] = 1;
    path = {root};
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < parents[v].size()) {
        NodeId w = parents[v][i++];
        if (color[w] == 1) {
          std::string msg = "transitive_closure: cycle ";
          auto it = std::find(path.begin(), path.end(), w);
          for (; it != path.end(); ++it) msg += g.token(*it) + " -> ";
          msg += g.token(w);
          throw std::runtime_error(msg);
        }
        if (color[w] == 0) {
          color[w] = 1;
          stack.emplace_back(w, 0);
          path.push_back(w);
        }
      } else {
        color[v] = 2;
        stack.pop_back();
        path.pop_back();
      }
    }
  }

  std::vector<Edge> closure;
  std::vector<char> seen(m, 0);
  std::vector<NodeId> todo, reach;
  for (NodeId u = 0; u < m; ++u) {
    reach.clear();
    todo = {u};
    seen[u] = 1;
    while (!todo.empty()) {
      NodeId v = todo.back();
      todo.pop_back();
      for (NodeId w : parents[v])
        if (!seen[w]) {
          seen[w] = 1;
          reach.push_back(w);
          todo.push_back(w);
        }
    }
    std::sort(reach.begin(), reach.end());
    for (NodeId v : reach) closure.push_back({u, v});
    seen[u] = 0;
    for (NodeId v : reach) seen[v] = 0;
  }
  return Graph(g.tokens(), std::move(closure));
}

Graph balanced_tree(int r, int h) {
  if (r < 2) throw std::invalid_argument("balanced_tree: branching factor must be >= 2");
  if (h < 1) throw std::invalid_argument("balanced_tree: depth must be >= 1");
  int64_t total = 1, level = 1;
  for (int i = 0; i < h; ++i) {
    level *= r;
    total += level;
    if (total > 5'000'000)
      throw std::invalid_argument("balanced_tree: too many nodes");
  }
  std::vector<std::string> tokens(total);
  for (int64_t v = 0; v < total; ++v) tokens[v] = "n" + std::to_string(v);
  std::vector<Edge> edges;
  edges.reserve(total - 1);
  for (int64_t v = 1; v < total; ++v)
    edges.push_back({static_cast<NodeId>(v), static_cast<NodeId>((v - 1) / r)});
  return Graph(std::move(tokens), std::move(edges));
}

Graph compressed_graph(int m, int k, uint64_t seed) {
  if (m < 3) throw std::invalid_argument("compressed_graph: need at least 3 nodes");
  if (k < 1) throw std::invalid_argument("compressed_graph: need at least 1 tree");
  Rng rng(seed);
  std::vector<Edge> edges;
  std::vector<int32_t> degree(m);
  std::vector<NodeId> seq(m - 2);
  for (int t = 0; t < k; ++t) {
    // Uniform random labelled tree via Pruefer decoding.
    for (auto& s : seq) s = static_cast<NodeId>(rng.bounded(m));
    std::fill(degree.begin(), degree.end(), 1);
    for (NodeId s : seq) ++degree[s];
    auto push = [&](NodeId a, NodeId b) {
      edges.push_back({std::min(a, b), std::max(a, b)});
    };
    NodeId ptr = 0;
    while (degree[ptr] != 1) ++ptr;
    NodeId leaf = ptr;
    for (NodeId s : seq) {
      push(leaf, s);
      if (--degree[s] == 1 && s < ptr) {
        leaf = s;
      } else {
        ++ptr;
        while (degree[ptr] != 1) ++ptr;
        leaf = ptr;
      }
    }
    push(leaf, static_cast<NodeId>(m - 1));
  }
  std::vector<std::string> tokens(m);
  for (int v = 0; v < m; ++v) tokens[v] = "n" + std::to_string(v);
  return Graph(std::move(tokens), std::move(edges));
}

EdgeSplit split_edges(const Graph& g, const SplitSpec& spec) {
  if (spec.train_frac <= 0.0 || spec.valid_frac < 0.0 || spec.test_frac < 0.0)
    throw std::invalid_argument("split_edges: fractions must be nonnegative with train > 0");
  double sum = spec.train_frac + spec.valid_frac + spec.test_frac;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split_edges: fractions must sum to 1");

  int64_t n = g.edge_count();
  int64_t n_valid = llround(spec.valid_frac * static_cast<double>(n));
  int64_t n_test = llround(spec.test_frac * static_cast<double>(n));
  if (n_valid + n_test >= n && n_valid + n_test > 0)
    throw std::runtime_error("split_edges: nothing left for training");

  // 0 = train, 1 = valid, 2 = test. Start with everything in train and move
  // holdout edges out greedily; an edge may leave only while both endpoints
  // keep at least one other training edge.
  std::vector<int64_t> train_deg(g.node_count(), 0);
  for (const Edge& e : g.edges()) {
    ++train_deg[e.child];
    ++train_deg[e.parent];
  }
  std::vector<int8_t> bucket(n, 0);
  std::vector<int64_t> order(n);
  for (int64_t i = 0; i < n; ++i) order[i] = i;

  Rng rng(spec.seed);
  int64_t want_valid = n_valid, want_test = n_test;
  for (int attempt = 0; attempt < 64; ++attempt) {
    rng.shuffle(order);
    for (int64_t i : order) {
      if (want_valid == 0 && want_test == 0) break;
      if (bucket[i] != 0) continue;
      const Edge& e = g.edges()[i];
      if (train_deg[e.child] < 2 || train_deg[e.parent] < 2) continue;
      bucket[i] = want_valid > 0 ? 1 : 2;
      (want_valid > 0 ? want_valid : want_test)--;
      --train_deg[e.child];
      --train_deg[e.parent];
    }
    if (want_valid == 0 && want_test == 0) break;
  }
  if (want_valid != 0 || want_test != 0)
    throw std::runtime_error(
        "split_edges: cannot hold out the requested fraction while keeping "
        "every node in training");

  EdgeSplit out;
  for (int64_t i = 0; i < n; ++i) {
    const Edge& e = g.edges()[i];
    (bucket[i] == 0 ? out.train : bucket[i] == 1 ? out.valid : out.test)
        .push_back(e);
  }
  return out;
}

std::vector<int32_t> bfs_all_pairs(const Graph& g, int workers) {
  int64_t m = g.node_count();
  std::vector<int32_t> dist(m * m, -1);
  if (workers < 1) workers = 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(workers) \
    if (workers > 1)
#endif
  for (int64_t s = 0; s < m; ++s) {
    int32_t* row = dist.data() + s * m;
    std::vector<NodeId> queue;
    queue.reserve(m);
    queue.push_back(static_cast<NodeId>(s));
    row[s] = 0;
    for (size_t head = 0; head < queue.size(); ++head) {
      NodeId v = queue[head];
      for (NodeId w : g.neighbors(v))
        if (row[w] < 0) {
          row[w] = row[v] + 1;
          queue.push_back(w);
        }
    }
  }
  return dist;
}

namespace detail {

namespace {

inline int32_t tuple_hyp(const int32_t* dist, int64_t m, int64_t a, int64_t b,
                         int64_t c, int64_t d) {
  int32_t s1 = dist[a * m + b] + dist[c * m + d];
  int32_t s2 = dist[a * m + c] + dist[b * m + d];
  int32_t s3 = dist[a * m + d] + dist[b * m + c];
  int32_t hi = s1, mid = s2;
  if (mid > hi) std::swap(hi, mid);
  if (s3 > hi) {
    mid = hi;
    hi = s3;
  } else if (s3 > mid) {
    mid = s3;
  }
  return hi - mid;
}

}  // namespace

double delta_scan_serial(const std::vector<int32_t>& dist, int64_t m) {
  int32_t best = 0;
  for (int64_t a = 0; a < m; ++a)
    for (int64_t b = a + 1; b < m; ++b)
      for (int64_t c = b + 1; c < m; ++c)
        for (int64_t d = c + 1; d < m; ++d)
          best = std::max(best, tuple_hyp(dist.data(), m, a, b, c, d));
  return best / 2.0;
}

double delta_scan_parallel(const std::vector<int32_t>& dist, int64_t m,
                           int workers) {
  if (workers < 1) workers = 1;
  int32_t best = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers) \
    reduction(max : best) if (workers > 1)
#endif
  for (int64_t a = 0; a < m; ++a)
    for (int64_t b = a + 1; b < m; ++b)
      for (int64_t c = b + 1; c < m; ++c)
        for (int64_t d = c + 1; d < m; ++d)
          best = std::max(best, tuple_hyp(dist.data(), m, a, b, c, d));
  return best / 2.0;
}

}  // namespace detail

namespace {

void require_connected(const std::vector<int32_t>& dist, int64_t m) {
  for (int64_t i = 0; i < m * m; ++i)
    if (dist[i] < 0)
      throw std::runtime_error(
          "delta_hyperbolicity: graph is disconnected (undirected view)");
}

}  // namespace

double delta_hyperbolicity_exact(const Graph& g, int node_cap, int workers) {
  int64_t m = g.node_count();
  if (m > node_cap)
    throw std::invalid_argument(
        "delta_hyperbolicity_exact: graph exceeds node cap (" +
        std::to_string(m) + " > " + std::to_string(node_cap) +
        "); use sampled mode");
  if (m < 4) {
    require_connected(bfs_all_pairs(g), m);
    return 0.0;
  }
  auto dist = bfs_all_pairs(g, workers);
  require_connected(dist, m);
  return workers > 1 ? detail::delta_scan_parallel(dist, m, workers)
                     : detail::delta_scan_serial(dist, m);
}

double delta_hyperbolicity_sampled(const Graph& g, int64_t samples,
                                   uint64_t seed, int workers) {
  if (samples < 1)
    throw std::invalid_argument("delta_hyperbolicity_sampled: samples must be >= 1");
  int64_t m = g.node_count();
  if (m < 4) {
    require_connected(bfs_all_pairs(g), m);
    return 0.0;
  }
  auto dist = bfs_all_pairs(g, workers);
  require_connected(dist, m);
  Rng rng(seed);
  int32_t best = 0;
  int64_t t[4];
  for (int64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < 4; ++i) {
      for (;;) {
        t[i] = static_cast<int64_t>(rng.bounded(m));
        bool fresh = true;
        for (int j = 0; j < i; ++j) fresh &= (t[j] != t[i]);
        if (fresh) break;
      }
    }
    best = std::max(best,
                    detail::tuple_hyp(dist.data(), m, t[0], t[1], t[2], t[3]));
  }
  return best / 2.0;
}

}  // namespace cxhyp
