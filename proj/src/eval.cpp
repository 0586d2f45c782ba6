#include "cxhyp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cxhyp {

namespace {

template <typename Table>
void fill_dist_row(const Table& t, NodeId z, std::vector<double>& out);

template <>
void fill_dist_row(const EmbeddingTable& t, NodeId z,
                   std::vector<double>& out) {
  out.resize(t.m);
  PointView zv = t.view(z);
  for (int64_t c = 0; c < t.m; ++c)
    out[c] = detail::dist_unchecked(zv, t.view(c));
}

template <>
void fill_dist_row(const RealTable& t, NodeId z, std::vector<double>& out) {
  out.resize(t.m);
  const double* zr = t.row(z);
  for (int64_t c = 0; c < t.m; ++c)
    out[c] = detail::poincare_dist_unchecked(zr, t.row(c), t.dim);
}

std::vector<std::vector<NodeId>> parent_lists(const Graph& g) {
  std::vector<std::vector<NodeId>> out(g.node_count());
  for (const Edge& e : g.edges()) out[e.child].push_back(e.parent);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

void check_task(const RankingTask& task, int64_t table_m) {
  if (!task.eval_graph) throw std::invalid_argument("eval: missing eval graph");
  if (task.eval_graph->node_count() != table_m)
    throw std::invalid_argument("eval: table/graph size mismatch");
  if (task.mode == EvalMode::link_prediction) {
    if (!task.train_graph && !task.filter_graph)
      throw std::invalid_argument(
          "eval: link_prediction mode needs the observed (train) edges");
    if (task.train_graph) {
      if (task.train_graph->node_count() != table_m)
        throw std::invalid_argument("eval: table/graph size mismatch");
      for (const Edge& e : task.eval_graph->edges())
        if (task.train_graph->has_edge(e.child, e.parent))
          throw std::invalid_argument(
              "eval: eval edge " + task.eval_graph->token(e.child) + " -> " +
              task.eval_graph->token(e.parent) + " also appears in train");
    }
  }
  if (task.filter_graph && task.filter_graph->node_count() != table_m)
    throw std::invalid_argument("eval: table/graph size mismatch");
}

template <typename Table>
NodeRanks rank_query(const Table& table, const RankingTask& task, NodeId z,
                     std::span<const NodeId> targets,
                     std::vector<double>& dist) {
  fill_dist_row(table, z, dist);
  const Graph& filter = task.filter();
  NodeRanks nr;
  nr.ranks.assign(targets.size(), 1);
  for (NodeId c = 0; c < static_cast<NodeId>(table.m); ++c) {
    if (c == z || filter.adjacent(z, c)) continue;
    for (size_t t = 0; t < targets.size(); ++t)
      if (c != targets[t] && dist[c] <= dist[targets[t]]) ++nr.ranks[t];
  }
  nr.map_ranks = nr.ranks;
  std::sort(nr.map_ranks.begin(), nr.map_ranks.end());
  if (task.mode == EvalMode::reconstruction) {
    // Positives were filtered out of each other's candidate lists; fold the
    // i better-placed ones back in so precision is over the combined list.
    for (size_t i = 0; i < nr.map_ranks.size(); ++i)
      nr.map_ranks[i] += static_cast<int64_t>(i);
  }
  return nr;
}

template <typename Table>
NodeRanks rank_neighbors_impl(const Table& table, const RankingTask& task,
                              NodeId z) {
  check_task(task, table.m);
  if (z < 0 || z >= table.m)
    throw std::invalid_argument("rank_neighbors: unknown node");
  auto parents = parent_lists(*task.eval_graph);
  if (parents[z].empty())
    throw std::invalid_argument("rank_neighbors: node " +
                                task.eval_graph->token(z) +
                                " has no eval neighbours");
  std::vector<double> dist;
  return rank_query(table, task, z, parents[z], dist);
}

double ap_of(const std::vector<int64_t>& map_ranks) {
  std::vector<int64_t> sorted = map_ranks;
  std::sort(sorted.begin(), sorted.end());
  double ap = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i)
    ap += static_cast<double>(i + 1) / static_cast<double>(sorted[i]);
  return ap / static_cast<double>(sorted.size());
}

template <typename Table>
EvalReport evaluate_impl(const Table& table, const RankingTask& task,
                         const std::vector<int32_t>& hits_ns, int workers) {
  check_task(task, table.m);
  std::vector<int32_t> ns = hits_ns;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (int32_t n : ns)
    if (n < 1) throw std::invalid_argument("evaluate: hits N must be >= 1");

  auto parents = parent_lists(*task.eval_graph);
  std::vector<NodeId> queries;
  for (NodeId z = 0; z < static_cast<NodeId>(table.m); ++z)
    if (!parents[z].empty()) queries.push_back(z);
  if (queries.empty())
    throw std::invalid_argument("evaluate: no eval edges to rank");

  int64_t nq = static_cast<int64_t>(queries.size());
  std::vector<NodeRanks> per_query(nq);
  if (workers < 1) workers = 1;
#ifdef _OPENMP
#pragma omp parallel num_threads(workers) if (workers > 1)
#endif
  {
    std::vector<double> dist;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 16)
#endif
    for (int64_t i = 0; i < nq; ++i)
      per_query[i] =
          rank_query(table, task, queries[i], parents[queries[i]], dist);
  }

  EvalReport rep;
  rep.nodes = nq;
  double map_sum = 0.0, mrr_sum = 0.0;
  std::vector<int64_t> hit_counts(ns.size(), 0);
  for (const NodeRanks& nr : per_query) {
    rep.edges += static_cast<int64_t>(nr.ranks.size());
    map_sum += ap_of(nr.map_ranks);
    double rr = 0.0;
    int64_t best = nr.ranks[0];
    for (int64_t r : nr.ranks) {
      rr += 1.0 / static_cast<double>(r);
      best = std::min(best, r);
    }
    mrr_sum += rr / static_cast<double>(nr.ranks.size());
    for (size_t k = 0; k < ns.size(); ++k)
      if (best <= ns[k]) ++hit_counts[k];
  }
  rep.map = map_sum / static_cast<double>(nq);
  rep.mrr = mrr_sum / static_cast<double>(nq);
  for (size_t k = 0; k < ns.size(); ++k)
    rep.hits.emplace_back(ns[k],
                          static_cast<double>(hit_counts[k]) /
                              static_cast<double>(nq));
  return rep;
}

template <typename Table>
EvalReport bucketed_impl(const Table& table, const RankingTask& task,
                         const std::vector<BucketRange>& buckets,
                         const std::vector<int32_t>& hits_ns,
                         const Graph& original, int workers) {
  check_task(task, table.m);
  if (buckets.empty())
    throw std::invalid_argument("bucketed_1n_report: no buckets");
  if (original.node_count() != table.m)
    throw std::invalid_argument("bucketed_1n_report: original graph size mismatch");

  std::vector<int64_t> parent_count(table.m, 0);
  for (const Edge& e : original.edges()) ++parent_count[e.child];

  std::vector<std::vector<Edge>> grouped(buckets.size());
  for (const Edge& e : task.eval_graph->edges()) {
    int64_t c = parent_count[e.child];
    for (size_t b = 0; b < buckets.size(); ++b)
      if (c >= buckets[b].lo && c <= buckets[b].hi) {
        grouped[b].push_back(e);
        break;
      }
  }

  EvalReport rep = evaluate_impl(table, task, hits_ns, workers);
  rep.bucketed = true;
  const Graph& filter = task.filter();
  for (size_t b = 0; b < buckets.size(); ++b) {
    if (grouped[b].empty()) continue;  // absent, not zero
    Graph bucket_graph(task.eval_graph->tokens(), std::move(grouped[b]));
    RankingTask sub = task;
    sub.eval_graph = &bucket_graph;
    sub.filter_graph = &filter;
    rep.buckets.emplace_back(buckets[b].label,
                             evaluate_impl(table, sub, hits_ns, workers));
  }
  return rep;
}

}  // namespace

NodeRanks rank_neighbors(const EmbeddingTable& table, const RankingTask& task,
                         NodeId z) {
  return rank_neighbors_impl(table, task, z);
}
NodeRanks rank_neighbors(const RealTable& table, const RankingTask& task,
                         NodeId z) {
  return rank_neighbors_impl(table, task, z);
}

double map_score(const std::vector<std::vector<int64_t>>& map_ranks) {
  if (map_ranks.empty()) throw std::invalid_argument("map_score: empty input");
  double s = 0.0;
  for (const auto& r : map_ranks) {
    if (r.empty()) throw std::invalid_argument("map_score: empty rank list");
    s += ap_of(r);
  }
  return s / static_cast<double>(map_ranks.size());
}

double mrr_score(const std::vector<std::vector<int64_t>>& ranks) {
  if (ranks.empty()) throw std::invalid_argument("mrr_score: empty input");
  double s = 0.0;
  for (const auto& r : ranks) {
    if (r.empty()) throw std::invalid_argument("mrr_score: empty rank list");
    double rr = 0.0;
    for (int64_t v : r) rr += 1.0 / static_cast<double>(v);
    s += rr / static_cast<double>(r.size());
  }
  return s / static_cast<double>(ranks.size());
}

double hits_at_n(const std::vector<std::vector<int64_t>>& ranks, int32_t N) {
  if (N < 1) throw std::invalid_argument("hits_at_n: N must be >= 1");
  if (ranks.empty()) throw std::invalid_argument("hits_at_n: empty input");
  int64_t hit = 0;
  for (const auto& r : ranks) {
    if (r.empty()) throw std::invalid_argument("hits_at_n: empty rank list");
    if (*std::min_element(r.begin(), r.end()) <= N) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(ranks.size());
}

EvalReport evaluate(const EmbeddingTable& table, const RankingTask& task,
                    const std::vector<int32_t>& hits_ns, int workers) {
  return evaluate_impl(table, task, hits_ns, workers);
}
EvalReport evaluate(const RealTable& table, const RankingTask& task,
                    const std::vector<int32_t>& hits_ns, int workers) {
  return evaluate_impl(table, task, hits_ns, workers);
}

std::vector<BucketRange> parse_buckets(const std::string& text) {
  std::vector<BucketRange> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string part = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (part.empty())
      throw std::invalid_argument("parse_buckets: empty bucket in \"" + text +
                                  "\"");
    BucketRange r;
    r.label = part;
    try {
      size_t used = 0;
      if (part.back() == '+') {
        r.lo = std::stoll(part.substr(0, part.size() - 1), &used);
        if (used != part.size() - 1) throw std::invalid_argument(part);
        r.hi = std::numeric_limits<int64_t>::max();
      } else if (size_t dash = part.find('-'); dash != std::string::npos) {
        r.lo = std::stoll(part.substr(0, dash), &used);
        if (used != dash) throw std::invalid_argument(part);
        r.hi = std::stoll(part.substr(dash + 1), &used);
        if (used != part.size() - dash - 1) throw std::invalid_argument(part);
      } else {
        r.lo = r.hi = std::stoll(part, &used);
        if (used != part.size()) throw std::invalid_argument(part);
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_buckets: bad bucket \"" + part +
                                  "\"");
    }
    if (r.lo < 0 || r.hi < r.lo)
      throw std::invalid_argument("parse_buckets: bad bucket \"" + part +
                                  "\"");
    out.push_back(std::move(r));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("parse_buckets: no buckets");
  return out;
}

EvalReport bucketed_1n_report(const EmbeddingTable& table,
                              const RankingTask& task,
                              const std::vector<BucketRange>& buckets,
                              const std::vector<int32_t>& hits_ns,
                              const Graph& original, int workers) {
  return bucketed_impl(table, task, buckets, hits_ns, original, workers);
}
EvalReport bucketed_1n_report(const RealTable& table, const RankingTask& task,
                              const std::vector<BucketRange>& buckets,
                              const std::vector<int32_t>& hits_ns,
                              const Graph& original, int workers) {
  return bucketed_impl(table, task, buckets, hits_ns, original, workers);
}

std::string EvalReport::to_json(bool top_level) const {
  nlohmann::ordered_json j;
  if (top_level) j["schema"] = "v1";
  j["map"] = map;
  j["mrr"] = mrr;
  nlohmann::ordered_json h = nlohmann::ordered_json::object();
  for (const auto& [n, v] : hits) h[std::to_string(n)] = v;
  j["hits"] = std::move(h);
  if (top_level) {
    if (!bucketed) {
      j["buckets"] = nullptr;
    } else {
      nlohmann::ordered_json b = nlohmann::ordered_json::object();
      for (const auto& [label, sub] : buckets)
        b[label] = nlohmann::ordered_json::parse(sub.to_json(false));
      j["buckets"] = std::move(b);
    }
  }
  j["counts"] = {{"nodes", nodes}, {"edges", edges}};
  return j.dump();
}

}  // namespace cxhyp
