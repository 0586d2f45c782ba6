#pragma once

#include <span>
#include <string>

#include "cxhyp/graph.hpp"
#include "cxhyp/model.hpp"

namespace cxhyp {

// Real Poincare-ball baseline. For a complex model of dimension n the
// baseline uses 2n real coordinates, so both models spend the same number
// of parameters per node and consume the same random stream.
struct RealTable {
  int64_t m = 0;
  int32_t dim = 0;  // 2n
  std::vector<double> coords;

  RealTable() = default;
  RealTable(int64_t m_, int32_t dim_)
      : m(m_), dim(dim_), coords(m_ * dim_, 0.0) {}

  const double* row(int64_t i) const { return coords.data() + i * dim; }
  double* row(int64_t i) { return coords.data() + i * dim; }

  bool operator==(const RealTable&) const = default;
};

// arcosh(1 + 2 ||u - v||^2 / ((1 - ||u||^2)(1 - ||v||^2))).
double poincare_distance(std::span<const double> u, std::span<const double> v);

struct PoincareTrainResult {
  RealTable table;
  std::vector<double> epoch_loss;
};

// Same loss, negative sampler, schedule, and seed stream as train(); only
// the geometry differs. config.dim is the complex dimension being matched,
// the table allocates 2 * config.dim reals per node.
PoincareTrainResult poincare_rsgd_train(const Graph& g,
                                        const TrainConfig& config);
PoincareTrainResult poincare_rsgd_train_parallel(const Graph& g,
                                                 const TrainConfig& config,
                                                 int workers);

// Checkpoint format identical to the unit-ball one, header tag poincare-v1,
// each row carrying the 2n coordinates.
void save_poincare_checkpoint(const RealTable& table,
                              const std::vector<std::string>& vocab,
                              const std::string& path);

struct PoincareCheckpoint {
  RealTable table;
  std::vector<std::string> vocab;
};
PoincareCheckpoint load_poincare_checkpoint(const std::string& path);

namespace detail {

double poincare_dist_unchecked(const double* u, const double* v, int32_t dim);

}  // namespace detail

}  // namespace cxhyp
