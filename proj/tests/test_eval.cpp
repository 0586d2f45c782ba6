#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "cxhyp/eval.hpp"
#include "cxhyp/rng.hpp"

using namespace cxhyp;

namespace {

void set_row(EmbeddingTable& t, int64_t i, std::vector<double> re,
             std::vector<double> im) {
  std::copy(re.begin(), re.end(), t.x_row(i));
  std::copy(im.begin(), im.end(), t.y_row(i));
}

EmbeddingTable spread_table(int64_t m, int32_t n, uint64_t seed) {
  EmbeddingTable t(m, n);
  Rng rng(seed);
  for (double& v : t.xs) v = rng.uniform(-0.4, 0.4);
  for (double& v : t.ys) v = rng.uniform(-0.4, 0.4);
  return t;
}

double table_distance(const EmbeddingTable& t, NodeId a, NodeId b) {
  ComplexPoint za = ComplexPoint::zero(t.n), zb = ComplexPoint::zero(t.n);
  for (int32_t j = 0; j < t.n; ++j) {
    za.re[j] = t.view(a).re[j];
    za.im[j] = t.view(a).im[j];
    zb.re[j] = t.view(b).re[j];
    zb.im[j] = t.view(b).im[j];
  }
  return distance(za, zb);
}

// Straight-line reimplementation of the ranking protocol, kept deliberately
// naive: per query walk every candidate, per target count the ones at least
// as close.
struct OracleReport {
  double map = 0.0, mrr = 0.0, hits1 = 0.0, hits3 = 0.0;
  int64_t nodes = 0, edges = 0;
};

OracleReport oracle_evaluate(const EmbeddingTable& t, const Graph& eval,
                             const Graph& filter, bool reconstruction) {
  OracleReport rep;
  double map_sum = 0, mrr_sum = 0;
  int64_t hit1 = 0, hit3 = 0;
  for (NodeId z = 0; z < static_cast<NodeId>(t.m); ++z) {
    std::vector<NodeId> targets;
    for (const Edge& e : eval.edges())
      if (e.child == z) targets.push_back(e.parent);
    if (targets.empty()) continue;
    ++rep.nodes;
    rep.edges += static_cast<int64_t>(targets.size());

    std::vector<int64_t> ranks;
    for (NodeId w : targets) {
      int64_t r = 1;
      for (NodeId c = 0; c < static_cast<NodeId>(t.m); ++c) {
        if (c == z || c == w || filter.adjacent(z, c)) continue;
        if (table_distance(t, z, c) <= table_distance(t, z, w)) ++r;
      }
      ranks.push_back(r);
    }

    std::vector<int64_t> combined = ranks;
    std::sort(combined.begin(), combined.end());
    if (reconstruction)
      for (size_t i = 0; i < combined.size(); ++i)
        combined[i] += static_cast<int64_t>(i);
    double ap = 0;
    for (size_t i = 0; i < combined.size(); ++i)
      ap += static_cast<double>(i + 1) / static_cast<double>(combined[i]);
    map_sum += ap / static_cast<double>(combined.size());

    double rr = 0;
    int64_t best = ranks[0];
    for (int64_t r : ranks) {
      rr += 1.0 / static_cast<double>(r);
      best = std::min(best, r);
    }
    mrr_sum += rr / static_cast<double>(ranks.size());
    if (best <= 1) ++hit1;
    if (best <= 3) ++hit3;
  }
  rep.map = map_sum / static_cast<double>(rep.nodes);
  rep.mrr = mrr_sum / static_cast<double>(rep.nodes);
  rep.hits1 = static_cast<double>(hit1) / static_cast<double>(rep.nodes);
  rep.hits3 = static_cast<double>(hit3) / static_cast<double>(rep.nodes);
  return rep;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("metric formulas on fixed rank lists") {
  CHECK(map_score({{1, 3}}) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(mrr_score({{1, 3}}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(map_score({{1}, {4}}) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(map_score({{2, 1}}) == map_score({{1, 2}}));

  CHECK(hits_at_n({{1, 3}}, 1) == 1.0);
  CHECK(hits_at_n({{2, 3}}, 1) == 0.0);
  CHECK(hits_at_n({{2, 3}}, 3) == 1.0);
  CHECK(hits_at_n({{2}, {5}}, 3) == 0.5);

  CHECK_THROWS_AS(map_score({}), std::invalid_argument);
  CHECK_THROWS_AS(mrr_score({{}}), std::invalid_argument);
  CHECK_THROWS_AS(hits_at_n({{1}}, 0), std::invalid_argument);
}

TEST_CASE("bucket list parsing") {
  auto b = parse_buckets("1,2-5,6+");
  REQUIRE(b.size() == 3);
  CHECK(b[0].label == "1");
  CHECK(b[0].lo == 1);
  CHECK(b[0].hi == 1);
  CHECK(b[1].lo == 2);
  CHECK(b[1].hi == 5);
  CHECK(b[2].label == "6+");
  CHECK(b[2].lo == 6);
  CHECK(b[2].hi == std::numeric_limits<int64_t>::max());

  CHECK_THROWS_AS(parse_buckets(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_buckets("a"), std::invalid_argument);
  CHECK_THROWS_AS(parse_buckets("3-2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_buckets("2-"), std::invalid_argument);
  CHECK_THROWS_AS(parse_buckets("1,,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_buckets("1.5"), std::invalid_argument);
}

TEST_CASE("a hand-placed chain ranks perfectly") {
  Graph g = graph_from_pairs({{"a", "b"}, {"b", "c"}});
  EmbeddingTable t(3, 1);
  set_row(t, 0, {0.5}, {0.0});
  set_row(t, 1, {0.0}, {0.0});
  set_row(t, 2, {-0.5}, {0.0});

  RankingTask task;
  task.eval_graph = &g;
  EvalReport rep = evaluate(t, task, {1, 10});
  CHECK(rep.map == 1.0);
  CHECK(rep.mrr == 1.0);
  CHECK(rep.hits[0] == std::pair<int32_t, double>{1, 1.0});
  CHECK(rep.hits[1] == std::pair<int32_t, double>{10, 1.0});
  CHECK(rep.nodes == 2);
  CHECK(rep.edges == 2);

  NodeRanks nr = rank_neighbors(t, task, 0);
  CHECK(nr.ranks == std::vector<int64_t>{1});
  CHECK(nr.map_ranks == std::vector<int64_t>{1});
}

TEST_CASE("matches a brute-force oracle, reconstruction") {
  Graph g = compressed_graph(12, 2, 3);
  EmbeddingTable t = spread_table(12, 2, 5);
  RankingTask task;
  task.eval_graph = &g;
  EvalReport rep = evaluate(t, task, {1, 3});
  OracleReport want = oracle_evaluate(t, g, g, true);
  CHECK(rep.map == doctest::Approx(want.map).epsilon(1e-14));
  CHECK(rep.mrr == doctest::Approx(want.mrr).epsilon(1e-14));
  CHECK(rep.hits[0].second == want.hits1);
  CHECK(rep.hits[1].second == want.hits3);
  CHECK(rep.nodes == want.nodes);
  CHECK(rep.edges == want.edges);

  EvalReport par = evaluate(t, task, {1, 3}, 3);
  CHECK(par.map == rep.map);
  CHECK(par.mrr == rep.mrr);
  CHECK(par.hits == rep.hits);
}

TEST_CASE("matches a brute-force oracle, link prediction") {
  Graph g = compressed_graph(12, 2, 3);
  SplitSpec spec;
  spec.train_frac = 0.7;
  spec.valid_frac = 0.3;
  spec.test_frac = 0.0;
  spec.seed = 2;
  EdgeSplit s = split_edges(g, spec);
  Graph train(g.tokens(), s.train);
  Graph eval(g.tokens(), s.valid);
  EmbeddingTable t = spread_table(12, 2, 7);

  RankingTask task;
  task.mode = EvalMode::link_prediction;
  task.eval_graph = &eval;
  task.train_graph = &train;
  EvalReport rep = evaluate(t, task, {1, 3});
  OracleReport want = oracle_evaluate(t, eval, train, false);
  CHECK(rep.map == doctest::Approx(want.map).epsilon(1e-14));
  CHECK(rep.mrr == doctest::Approx(want.mrr).epsilon(1e-14));
  CHECK(rep.hits[0].second == want.hits1);
  CHECK(rep.hits[1].second == want.hits3);
}

TEST_CASE("coordinate phase rotation changes nothing") {
  Graph g = compressed_graph(15, 2, 9);
  EmbeddingTable t = spread_table(15, 2, 11);
  EmbeddingTable rotated(15, 2);
  double th = 0.7;
  for (int64_t i = 0; i < 15; ++i)
    for (int32_t j = 0; j < 2; ++j) {
      double re = t.view(i).re[j], im = t.view(i).im[j];
      rotated.x_row(i)[j] = std::cos(th) * re - std::sin(th) * im;
      rotated.y_row(i)[j] = std::sin(th) * re + std::cos(th) * im;
    }

  RankingTask task;
  task.eval_graph = &g;
  for (NodeId z = 0; z < 15; ++z) {
    bool has_parent = false;
    for (const Edge& e : g.edges()) has_parent |= (e.child == z);
    if (!has_parent) continue;
    NodeRanks a = rank_neighbors(t, task, z);
    NodeRanks b = rank_neighbors(rotated, task, z);
    CHECK(a.ranks == b.ranks);
  }
}

TEST_CASE("single-parent queries make map and mrr coincide") {
  Graph g = balanced_tree(2, 3);
  EmbeddingTable t = spread_table(g.node_count(), 2, 13);
  RankingTask task;
  task.eval_graph = &g;
  EvalReport rep = evaluate(t, task, {1});
  CHECK(rep.map == rep.mrr);
}

TEST_CASE("random placement ranks poorly on a bigger tree") {
  Graph g = compressed_graph(50, 1, 21);
  EmbeddingTable t = spread_table(50, 2, 17);
  RankingTask task;
  task.eval_graph = &g;
  EvalReport rep = evaluate(t, task, {1});
  CHECK(rep.map < 0.5);
}

TEST_CASE("hits columns are sorted, deduplicated, monotone") {
  Graph g = compressed_graph(20, 1, 8);
  EmbeddingTable t = spread_table(20, 2, 19);
  RankingTask task;
  task.eval_graph = &g;
  EvalReport rep = evaluate(t, task, {5, 1, 5, 3});
  REQUIRE(rep.hits.size() == 3);
  CHECK(rep.hits[0].first == 1);
  CHECK(rep.hits[1].first == 3);
  CHECK(rep.hits[2].first == 5);
  CHECK(rep.hits[0].second <= rep.hits[1].second);
  CHECK(rep.hits[1].second <= rep.hits[2].second);
}

TEST_CASE("bucketed report splits by parent count in the original graph") {
  Graph g = graph_from_pairs({{"a", "p1"}, {"a", "p2"}, {"b", "p1"}});
  EmbeddingTable t = spread_table(4, 2, 23);
  RankingTask task;
  task.eval_graph = &g;
  EvalReport rep =
      bucketed_1n_report(t, task, parse_buckets("1,2+"), {1}, g);
  CHECK(rep.bucketed);
  CHECK(rep.edges == 3);
  REQUIRE(rep.buckets.size() == 2);
  CHECK(rep.buckets[0].first == "1");
  CHECK(rep.buckets[0].second.edges == 1);
  CHECK(rep.buckets[0].second.nodes == 1);
  CHECK(rep.buckets[1].first == "2+");
  CHECK(rep.buckets[1].second.edges == 2);

  // The sub-evaluations keep the full filter, not the bucket subgraph.
  Graph bucket1(g.tokens(), {g.edges()[2]});
  RankingTask manual;
  manual.eval_graph = &bucket1;
  manual.filter_graph = &g;
  EvalReport want = evaluate(t, manual, {1});
  CHECK(rep.buckets[0].second.map == want.map);
  CHECK(rep.buckets[0].second.mrr == want.mrr);
}

TEST_CASE("empty buckets are omitted and counts come from the pre-closure graph") {
  Graph chain = graph_from_pairs({{"a", "b"}, {"b", "c"}});
  Graph closed = transitive_closure(chain);
  EmbeddingTable t = spread_table(3, 1, 29);
  RankingTask task;
  task.eval_graph = &closed;
  EvalReport rep =
      bucketed_1n_report(t, task, parse_buckets("5-9,1,2+"), {1}, chain);
  REQUIRE(rep.buckets.size() == 1);
  // a has two closure parents but only one original parent: bucket "1".
  CHECK(rep.buckets[0].first == "1");
  CHECK(rep.buckets[0].second.edges == 3);
}

TEST_CASE("report json shape") {
  Graph g = graph_from_pairs({{"a", "b"}, {"b", "c"}});
  EmbeddingTable t = spread_table(3, 1, 31);
  RankingTask task;
  task.eval_graph = &g;

  EvalReport rep = evaluate(t, task, {10, 1});
  auto j = nlohmann::ordered_json::parse(rep.to_json());
  std::vector<std::string> keys;
  for (auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"schema", "map", "mrr", "hits",
                                         "buckets", "counts"});
  CHECK(j["schema"] == "v1");
  CHECK(j["buckets"].is_null());
  CHECK(j["counts"]["nodes"] == 2);
  CHECK(j["counts"]["edges"] == 2);
  std::vector<std::string> hit_keys;
  for (auto& [k, v] : j["hits"].items()) hit_keys.push_back(k);
  CHECK(hit_keys == std::vector<std::string>{"1", "10"});

  EvalReport brep = bucketed_1n_report(t, task, parse_buckets("1,2+"), {1}, g);
  auto bj = nlohmann::ordered_json::parse(brep.to_json());
  CHECK(bj["buckets"].is_object());
  REQUIRE(bj["buckets"].contains("1"));
  std::vector<std::string> sub_keys;
  for (auto& [k, v] : bj["buckets"]["1"].items()) sub_keys.push_back(k);
  CHECK(sub_keys == std::vector<std::string>{"map", "mrr", "hits", "counts"});
}

TEST_CASE("task validation") {
  Graph g = graph_from_pairs({{"a", "b"}, {"b", "c"}});
  EmbeddingTable t = spread_table(3, 1, 37);

  RankingTask task;
  CHECK_THROWS_AS(evaluate(t, task, {1}), std::invalid_argument);

  task.eval_graph = &g;
  CHECK_THROWS_AS(evaluate(t, task, {0}), std::invalid_argument);
  CHECK_THROWS_AS(rank_neighbors(t, task, -1), std::invalid_argument);
  CHECK_THROWS_AS(rank_neighbors(t, task, 99), std::invalid_argument);
  // c is a root: it has no parents to rank.
  CHECK_THROWS_AS(rank_neighbors(t, task, 2), std::invalid_argument);

  RankingTask link;
  link.mode = EvalMode::link_prediction;
  link.eval_graph = &g;
  CHECK_THROWS_AS(evaluate(t, link, {1}), std::invalid_argument);
  link.train_graph = &g;  // overlaps the eval edges
  CHECK_THROWS_AS(evaluate(t, link, {1}), std::invalid_argument);

  Graph small = graph_from_pairs({{"a", "b"}});
  RankingTask mismatch;
  mismatch.eval_graph = &small;
  CHECK_THROWS_AS(evaluate(t, mismatch, {1}), std::invalid_argument);

  Graph no_edges(std::vector<std::string>{"a", "b", "c"}, {});
  RankingTask empty;
  empty.eval_graph = &no_edges;
  CHECK_THROWS_AS(evaluate(t, empty, {1}), std::invalid_argument);
}

}  // TEST_SUITE
