#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cxhyp/graph.hpp"
#include "cxhyp/model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cxhyp::detail {

// Generic SGD loop shared by the complex unit-ball model and the real
// Poincare baseline. A Space provides:
//   using Table;
//   Table init(int64_t m, Rng&) const;            // row init, 2n draws/node
//   int32_t coords() const;                       // real coords per node
//   double distance(const Table&, NodeId, NodeId) const;
//   bool pair_partials(const Table&, NodeId a, NodeId b,
//                      double* ga, double* gb) const;  // false if singular
//   void apply_step(Table&, NodeId, const double* grad, double lr) const;
// Both spaces draw identical amounts of randomness for equal m and config,
// so a seed selects the same edge orders and negatives in either geometry.

struct BatchScratch {
  std::vector<NodeId> denom_ids;  // the sampled negatives
  std::vector<double> denom_dist;
  std::vector<NodeId> nodes;      // participants in first-appearance order
  std::vector<double> grads;      // nodes.size() * coords accumulators
  std::vector<double> pair_a, pair_b;
};

// Accumulates the Euclidean gradient of the loss of one positive (p, q) with
// the given denominator members into ws.nodes / ws.grads and returns the
// loss value. Members at (numerically) zero distance from p contribute to
// the loss but produce no gradient. Without include_positive a constant
// self term e^0 joins the denominator sum.
template <typename Space>
double accumulate_batch(const Space& space, const typename Space::Table& table,
                        NodeId p, NodeId q, std::span<const NodeId> members,
                        bool include_positive, BatchScratch& ws) {
  const int32_t C = space.coords();
  ws.pair_a.resize(C);
  ws.pair_b.resize(C);

  double d_pq = space.distance(table, p, q);
  ws.denom_dist.clear();
  for (NodeId k : members) ws.denom_dist.push_back(space.distance(table, p, k));

  double S = include_positive ? std::exp(-d_pq) : 1.0;
  for (double d : ws.denom_dist) S += std::exp(-d);
  double loss = d_pq + std::log(S);

  auto slot = [&](NodeId u) -> double* {
    for (size_t i = 0; i < ws.nodes.size(); ++i)
      if (ws.nodes[i] == u) return ws.grads.data() + i * C;
    ws.nodes.push_back(u);
    ws.grads.resize(ws.nodes.size() * C, 0.0);
    return ws.grads.data() + (ws.nodes.size() - 1) * C;
  };
  auto add_pair = [&](NodeId a, NodeId b, double coeff) {
    if (!space.pair_partials(table, a, b, ws.pair_a.data(), ws.pair_b.data()))
      return;  // coincident pair, skipped
    double* ga = slot(a);
    for (int32_t j = 0; j < C; ++j) ga[j] += coeff * ws.pair_a[j];
    double* gb = slot(b);
    for (int32_t j = 0; j < C; ++j) gb[j] += coeff * ws.pair_b[j];
  };

  double cpos = 1.0;
  if (include_positive) cpos -= std::exp(-d_pq) / S;
  add_pair(p, q, cpos);
  for (size_t i = 0; i < ws.denom_dist.size(); ++i)
    add_pair(p, members[i], -std::exp(-ws.denom_dist[i]) / S);
  return loss;
}

template <typename Space>
void apply_updates(const Space& space, typename Space::Table& table, double lr,
                   BatchScratch& ws) {
  const int32_t C = space.coords();
  for (size_t i = 0; i < ws.nodes.size(); ++i) {
    const double* gu = ws.grads.data() + i * C;
    bool nonzero = false;
    for (int32_t j = 0; j < C && !nonzero; ++j) nonzero = gu[j] != 0.0;
    if (nonzero) space.apply_step(table, ws.nodes[i], gu, lr);
  }
  ws.nodes.clear();
  ws.grads.clear();
}

template <typename Space>
double accumulate_sampled_edge(const Space& space,
                               const typename Space::Table& table,
                               const Graph& g, NodeId p, NodeId q,
                               const TrainConfig& cfg, Rng& rng,
                               BatchScratch& ws) {
  ws.denom_ids.clear();
  sample_negatives(g, p, cfg.negatives, rng, ws.denom_ids);
  return accumulate_batch(space, table, p, q, ws.denom_ids,
                          cfg.include_positive_in_denominator, ws);
}

template <typename Space>
struct TrainOutput {
  typename Space::Table table;
  std::vector<double> epoch_loss;
};

template <typename Space>
TrainOutput<Space> train_loop(const Space& space, const Graph& g,
                              const TrainConfig& cfg, int workers) {
  cfg.validate();
  if (g.edge_count() == 0)
    throw std::invalid_argument("train: graph has no edges");
  if (workers < 1) workers = 1;

  Rng rng(cfg.seed);
  TrainOutput<Space> out;
  out.table = space.init(g.node_count(), rng);
  out.epoch_loss.reserve(cfg.epochs);

  const int64_t E = g.edge_count();
  const int64_t B = cfg.batch_size;
  std::vector<int64_t> order(E);
  std::iota(order.begin(), order.end(), 0);
  BatchScratch ws;

  for (int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = epoch < cfg.burnin_epochs ? cfg.lr / cfg.burnin_factor
                                          : cfg.lr;
    rng.shuffle(order);
    double total = 0.0;

    if (workers == 1) {
      for (int64_t i0 = 0; i0 < E; i0 += B) {
        int64_t i1 = std::min(E, i0 + B);
        for (int64_t i = i0; i < i1; ++i) {
          const Edge& e = g.edges()[order[i]];
          total += accumulate_sampled_edge(space, out.table, g, e.child,
                                           e.parent, cfg, rng, ws);
        }
        apply_updates(space, out.table, lr, ws);
      }
    } else {
      // Hogwild shards: concurrent unsynchronized writes to the shared
      // table; occasional lost updates are tolerated, bit-reproducibility
      // is not promised here.
      int64_t groups = (E + B - 1) / B;
#ifdef _OPENMP
#pragma omp parallel num_threads(workers) reduction(+ : total)
#endif
      {
        BatchScratch tws;
#ifdef _OPENMP
        int tid = omp_get_thread_num();
#else
        int tid = 0;
#endif
        Rng trng(cfg.seed ^
                 (0x9e3779b97f4a7c15ULL *
                  (static_cast<uint64_t>(epoch) * workers + tid + 1)));
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (int64_t gi = 0; gi < groups; ++gi) {
          int64_t i0 = gi * B, i1 = std::min(E, i0 + B);
          for (int64_t i = i0; i < i1; ++i) {
            const Edge& e = g.edges()[order[i]];
            total += accumulate_sampled_edge(space, out.table, g, e.child,
                                             e.parent, cfg, trng, tws);
          }
          apply_updates(space, out.table, lr, tws);
        }
      }
    }
    out.epoch_loss.push_back(total / static_cast<double>(E));
  }
  return out;
}

}  // namespace cxhyp::detail
