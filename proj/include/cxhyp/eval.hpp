#pragma once

#include <limits>
#include <string>

#include "cxhyp/graph.hpp"
#include "cxhyp/model.hpp"
#include "cxhyp/poincare.hpp"

namespace cxhyp {

enum class EvalMode { reconstruction, link_prediction };

// Ranking protocol: queries are the child nodes of eval edges; for a query z
// each of its eval parents w is ranked among candidate nodes by distance.
//
// Candidates for (z, w): every node except z itself and except the nodes
// related to z in the filter. In reconstruction mode the filter is the eval
// graph (all true relations of z are excluded except the target, the
// standard filtered protocol); in link_prediction mode the filter holds the
// observed (training) edges, so unobserved positives compete with w.
struct RankingTask {
  EvalMode mode = EvalMode::reconstruction;
  const Graph* eval_graph = nullptr;
  const Graph* train_graph = nullptr;   // link_prediction only; the filter
  const Graph* filter_graph = nullptr;  // explicit override (bucket reports)

  const Graph& filter() const {
    if (filter_graph) return *filter_graph;
    return mode == EvalMode::link_prediction && train_graph ? *train_graph
                                                            : *eval_graph;
  }
};

struct EvalReport {
  double map = 0.0;
  double mrr = 0.0;
  std::vector<std::pair<int32_t, double>> hits;  // ascending N
  int64_t nodes = 0;  // queries evaluated
  int64_t edges = 0;  // eval edges covered
  std::vector<std::pair<std::string, EvalReport>> buckets;
  bool bucketed = false;

  // Fixed key order: schema, map, mrr, hits, buckets, counts. Buckets render
  // as null when the report is not bucketed; empty buckets are omitted.
  std::string to_json(bool top_level = true) const;
};

struct NodeRanks {
  std::vector<int64_t> ranks;      // per eval parent, pessimistic ties
  std::vector<int64_t> map_ranks;  // sorted; other positives' offsets folded
                                   // in under the reconstruction protocol
};

// Rank every eval parent of z. Throws if z has no eval parent.
NodeRanks rank_neighbors(const EmbeddingTable& table, const RankingTask& task,
                         NodeId z);
NodeRanks rank_neighbors(const RealTable& table, const RankingTask& task,
                         NodeId z);

// Mean average precision over per-query combined rank lists (as in
// NodeRanks::map_ranks): AP = (1/K) sum_i i / R_i over the sorted list.
double map_score(const std::vector<std::vector<int64_t>>& map_ranks);

// Mean over queries of the mean reciprocal rank of their parents.
double mrr_score(const std::vector<std::vector<int64_t>>& ranks);

// Fraction of queries with at least one parent ranked within the top N.
double hits_at_n(const std::vector<std::vector<int64_t>>& ranks, int32_t N);

EvalReport evaluate(const EmbeddingTable& table, const RankingTask& task,
                    const std::vector<int32_t>& hits_ns, int workers = 1);
EvalReport evaluate(const RealTable& table, const RankingTask& task,
                    const std::vector<int32_t>& hits_ns, int workers = 1);

// Parent-count range, inclusive on both ends; first matching bucket wins.
struct BucketRange {
  std::string label;
  int64_t lo = 1;
  int64_t hi = std::numeric_limits<int64_t>::max();
};

// Parses "1,2-5,6-10,11-20,20+" style bucket lists ("N+" is open-ended).
std::vector<BucketRange> parse_buckets(const std::string& text);

// Groups eval edges by the child's parent count in `original` (the graph
// before closure), evaluates each group, and returns the overall report
// with per-bucket sub-reports attached. Empty buckets are omitted.
EvalReport bucketed_1n_report(const EmbeddingTable& table,
                              const RankingTask& task,
                              const std::vector<BucketRange>& buckets,
                              const std::vector<int32_t>& hits_ns,
                              const Graph& original, int workers = 1);
EvalReport bucketed_1n_report(const RealTable& table, const RankingTask& task,
                              const std::vector<BucketRange>& buckets,
                              const std::vector<int32_t>& hits_ns,
                              const Graph& original, int workers = 1);

}  // namespace cxhyp
