#include "cxhyp/poincare.hpp"

#include <cmath>

#include "cxhyp/table_io.hpp"
#include "cxhyp/trainer.hpp"

namespace cxhyp {

namespace detail {

double poincare_dist_unchecked(const double* u, const double* v, int32_t dim) {
  double uu = 0.0, vv = 0.0, diff = 0.0;
  for (int32_t j = 0; j < dim; ++j) {
    uu += u[j] * u[j];
    vv += v[j] * v[j];
    double d = u[j] - v[j];
    diff += d * d;
  }
  double g = 1.0 + 2.0 * diff / ((1.0 - uu) * (1.0 - vv));
  if (g < 1.0) g = 1.0;
  return std::acosh(g);
}

namespace {

struct PoincareSpace {
  using Table = RealTable;

  int32_t dim;  // 2n
  double eps_proj;
  double eps_d = 1e-12;

  Table init(int64_t m, Rng& rng) const {
    RealTable t(m, dim);
    for (double& c : t.coords) c = rng.uniform(-1e-3, 1e-3);
    return t;
  }

  int32_t coords() const { return dim; }

  double distance(const Table& t, NodeId a, NodeId b) const {
    return poincare_dist_unchecked(t.row(a), t.row(b), dim);
  }

  bool pair_partials(const Table& t, NodeId a, NodeId b, double* ga,
                     double* gb) const {
    const double* u = t.row(a);
    const double* v = t.row(b);
    double uu = 0.0, vv = 0.0, diff = 0.0;
    for (int32_t j = 0; j < dim; ++j) {
      uu += u[j] * u[j];
      vv += v[j] * v[j];
      double d = u[j] - v[j];
      diff += d * d;
    }
    double alpha = 1.0 - uu, beta = 1.0 - vv;
    double g = 1.0 + 2.0 * diff / (alpha * beta);
    if (g <= 1.0 + eps_d) return false;
    double s = 1.0 / std::sqrt(g * g - 1.0);
    double c = 4.0 / (alpha * beta) * s;
    for (int32_t j = 0; j < dim; ++j) {
      ga[j] = c * ((u[j] - v[j]) + diff / alpha * u[j]);
      gb[j] = c * ((v[j] - u[j]) + diff / beta * v[j]);
    }
    return true;
  }

  void apply_step(Table& t, NodeId u, const double* grad, double lr) const {
    double* r = t.row(u);
    double nsq = 0.0;
    for (int32_t j = 0; j < dim; ++j) nsq += r[j] * r[j];
    double f = 1.0 - nsq;
    double scale = f * f / 4.0;
    nsq = 0.0;
    for (int32_t j = 0; j < dim; ++j) {
      r[j] -= lr * scale * grad[j];
      nsq += r[j] * r[j];
    }
    if (nsq >= 1.0) {
      double rescale = (1.0 - eps_proj) / std::sqrt(nsq);
      for (int32_t j = 0; j < dim; ++j) r[j] *= rescale;
    }
  }
};

}  // namespace

}  // namespace detail

double poincare_distance(std::span<const double> u,
                         std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("poincare_distance: dimension mismatch");
  double uu = 0.0, vv = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    if (!std::isfinite(u[j]) || !std::isfinite(v[j]))
      throw std::invalid_argument("poincare_distance: non-finite coordinate");
    uu += u[j] * u[j];
    vv += v[j] * v[j];
  }
  if (!(uu < 1.0) || !(vv < 1.0))
    throw std::domain_error("poincare_distance: point outside the unit ball");
  return detail::poincare_dist_unchecked(u.data(), v.data(),
                                         static_cast<int32_t>(u.size()));
}

PoincareTrainResult poincare_rsgd_train(const Graph& g,
                                        const TrainConfig& config) {
  detail::PoincareSpace space{2 * config.dim, config.eps_proj};
  auto out = detail::train_loop(space, g, config, 1);
  return {std::move(out.table), std::move(out.epoch_loss)};
}

PoincareTrainResult poincare_rsgd_train_parallel(const Graph& g,
                                                 const TrainConfig& config,
                                                 int workers) {
  detail::PoincareSpace space{2 * config.dim, config.eps_proj};
  auto out = detail::train_loop(space, g, config, workers);
  return {std::move(out.table), std::move(out.epoch_loss)};
}

void save_poincare_checkpoint(const RealTable& table,
                              const std::vector<std::string>& vocab,
                              const std::string& path) {
  if (static_cast<int64_t>(vocab.size()) != table.m)
    throw std::invalid_argument("save_poincare_checkpoint: vocab size mismatch");
  if (table.dim % 2 != 0)
    throw std::invalid_argument("save_poincare_checkpoint: odd dimension");
  detail::TableText text;
  text.tag = "poincare-v1";
  text.m = table.m;
  text.n = table.dim / 2;
  text.vocab = vocab;
  text.values = table.coords;
  detail::save_table_text(text, path);
}

PoincareCheckpoint load_poincare_checkpoint(const std::string& path) {
  detail::TableText text = detail::load_table_text(path, "poincare-v1");
  PoincareCheckpoint ck;
  ck.vocab = std::move(text.vocab);
  ck.table.m = text.m;
  ck.table.dim = 2 * text.n;
  ck.table.coords = std::move(text.values);
  return ck;
}

}  // namespace cxhyp
