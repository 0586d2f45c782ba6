#pragma once

#include <string>

#include "cxhyp/geometry.hpp"
#include "cxhyp/graph.hpp"
#include "cxhyp/rng.hpp"

namespace cxhyp {

// m points of the unit ball in C^n, stored as two m*n row-major blocks
// (real parts in xs, imaginary parts in ys). Row i is node i.
struct EmbeddingTable {
  int64_t m = 0;
  int32_t n = 0;
  std::vector<double> xs, ys;

  EmbeddingTable() = default;
  EmbeddingTable(int64_t m_, int32_t n_)
      : m(m_), n(n_), xs(m_ * n_, 0.0), ys(m_ * n_, 0.0) {}

  PointView view(int64_t i) const {
    return {xs.data() + i * n, ys.data() + i * n, n};
  }
  double* x_row(int64_t i) { return xs.data() + i * n; }
  double* y_row(int64_t i) { return ys.data() + i * n; }

  bool operator==(const EmbeddingTable&) const = default;
};

struct TrainConfig {
  int32_t dim = 10;        // complex dimension n
  int32_t epochs = 300;
  double lr = 0.5;         // peak learning rate
  int32_t burnin_epochs = 10;
  double burnin_factor = 10.0;
  int32_t negatives = 50;  // sampled negatives per positive (self excluded)
  double eps_proj = 1e-5;
  MetricMode metric_mode = MetricMode::conformal;
  uint64_t seed = 0;
  int32_t batch_size = 1;  // edges whose updates are applied together
  // true: the positive pair's own term joins the softmax denominator, so its
  // attraction anneals as the pair closes. false: a constant self term e^0
  // takes that slot instead and the attraction coefficient stays 1.
  bool include_positive_in_denominator = true;

  void validate() const;
};

// One positive edge (p, q) plus denominator members sampled from the
// non-neighbours of p; neither p nor q may appear among them.
struct LossBatch {
  NodeId positive_child = 0;   // p
  NodeId positive_parent = 0;  // q
  std::vector<NodeId> negative_ids;
};

// Each coordinate i.i.d. uniform in (-1e-3, 1e-3); per node the n real parts
// are drawn first, then the n imaginary parts.
EmbeddingTable init_embeddings(int64_t m, int32_t n, uint64_t seed);

// loss = d(z_p, z_q) + log S where S sums exp(-d(z_p, z_k)) over the sampled
// members plus one extra slot: exp(-d(z_p, z_q)) when include_positive, a
// constant self term e^0 = 1 otherwise.
double soft_ranking_loss(const EmbeddingTable& table, const LossBatch& batch,
                         bool include_positive = true);

// Chain-rule coefficients d loss / d distance for one batch. `denominator`
// lines up with denominator_distances. With include_positive the positive
// coefficient is 1 - exp(-d_pq)/S and all coefficients sum to zero; without
// it the positive coefficient is exactly 1 and the members sum to
// -1 + 1/S, the missing share being the constant self term's.
struct LossPartials {
  double positive = 1.0;             // coefficient on d(z_p, z_q)
  std::vector<double> denominator;   // -exp(-d_k)/S per denominator member
};
LossPartials loss_distance_partials(double positive_distance,
                                    std::span<const double> denominator_distances,
                                    bool include_positive = true);

// Leaves in-ball points alone; anything else is pulled back to norm 1 - eps
// along its own direction.
ComplexPoint project(const ComplexPoint& z, double eps);

// One SGD update from a single batch: Euclidean gradients of the batch loss,
// metric rescale at each participating node, step, projection. Pairs at
// (numerically) zero distance contribute nothing.
void rsgd_step(EmbeddingTable& table, const Graph& g, const LossBatch& batch,
               double lr, const TrainConfig& config);

struct TrainResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;  // mean loss per positive edge
};

// Deterministic single-worker training: burnin_epochs at lr/burnin_factor,
// the rest at lr; every epoch shuffles the edge order and samples fresh
// negatives, all from the one seeded stream.
TrainResult train(const Graph& g, const TrainConfig& config);

// Hogwild-style variant: workers process shards of each epoch's edge order
// and write to the shared table without locks. Lost updates are tolerated;
// the result is not bit-reproducible. workers <= 1 falls back to train().
TrainResult train_parallel(const Graph& g, const TrainConfig& config,
                           int workers);

// Text checkpoint, one node per line (token then n real and n imaginary
// parts, 17 significant digits). Round-trips bit-exactly.
void save_checkpoint(const EmbeddingTable& table,
                     const std::vector<std::string>& vocab,
                     const std::string& path);

struct Checkpoint {
  EmbeddingTable table;
  std::vector<std::string> vocab;
};
Checkpoint load_checkpoint(const std::string& path);

namespace detail {

// In-place projection of one table row.
void project_row(double* x, double* y, int32_t n, double eps);

// Appends `count` ids drawn uniformly from the non-neighbours of p
// (undirected view), sampled with replacement under a rejection cap.
// Appends nothing when p neighbours every other node.
void sample_negatives(const Graph& g, NodeId p, int32_t count, Rng& rng,
                      std::vector<NodeId>& out);

}  // namespace detail

}  // namespace cxhyp
