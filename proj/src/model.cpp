#include "cxhyp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cxhyp/gradients.hpp"
#include "cxhyp/table_io.hpp"
#include "cxhyp/trainer.hpp"

namespace cxhyp {

void TrainConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("config: dim must be >= 1");
  if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
  if (burnin_epochs < 0)
    throw std::invalid_argument("config: burnin_epochs must be >= 0");
  if (!(burnin_factor > 0.0))
    throw std::invalid_argument("config: burnin_factor must be > 0");
  if (negatives < 1)
    throw std::invalid_argument("config: negatives must be >= 1");
  if (!(eps_proj > 0.0 && eps_proj < 0.1))
    throw std::invalid_argument("config: eps_proj must be in (0, 0.1)");
  if (batch_size < 1)
    throw std::invalid_argument("config: batch_size must be >= 1");
}

namespace detail {

void project_row(double* x, double* y, int32_t n, double eps) {
  double nsq = 0.0;
  for (int32_t j = 0; j < n; ++j) nsq += x[j] * x[j] + y[j] * y[j];
  if (nsq < 1.0) return;
  double f = (1.0 - eps) / std::sqrt(nsq);
  for (int32_t j = 0; j < n; ++j) {
    x[j] *= f;
    y[j] *= f;
  }
}

void sample_negatives(const Graph& g, NodeId p, int32_t count, Rng& rng,
                      std::vector<NodeId>& out) {
  int64_t m = g.node_count();
  if (m - 1 - g.degree(p) <= 0) return;
  int64_t cap = static_cast<int64_t>(count) * 100;
  int32_t got = 0;
  for (int64_t attempt = 0; attempt < cap && got < count; ++attempt) {
    NodeId c = static_cast<NodeId>(rng.bounded(static_cast<uint64_t>(m)));
    if (c == p || g.adjacent(p, c)) continue;
    out.push_back(c);
    ++got;
  }
}

// The complex unit ball as a trainer Space. Rows hold n real parts then n
// imaginary parts; gradient buffers use the same layout.
struct UnitBallSpace {
  using Table = EmbeddingTable;

  int32_t n;
  MetricMode mode;
  double eps_proj;
  double eps_d = 1e-12;

  Table init(int64_t m, Rng& rng) const {
    EmbeddingTable t(m, n);
    for (int64_t i = 0; i < m; ++i) {
      double* x = t.x_row(i);
      double* y = t.y_row(i);
      for (int32_t j = 0; j < n; ++j) x[j] = rng.uniform(-1e-3, 1e-3);
      for (int32_t j = 0; j < n; ++j) y[j] = rng.uniform(-1e-3, 1e-3);
    }
    return t;
  }

  int32_t coords() const { return 2 * n; }

  double distance(const Table& t, NodeId a, NodeId b) const {
    return dist_unchecked(t.view(a), t.view(b));
  }

  bool pair_partials(const Table& t, NodeId a, NodeId b, double* ga,
                     double* gb) const {
    PointView z = t.view(a), w = t.view(b);
    ComplexScalar zw = herm(z, w);
    double hzz = ball_norm_sq(z) - 1.0;
    double hww = ball_norm_sq(w) - 1.0;
    double den = hzz * hww;
    double q = std::norm(zw);
    double p = 2.0 * q / den - 1.0;
    if (p <= 1.0 + eps_d) return false;
    double s = 4.0 / std::sqrt(p * p - 1.0);
    double qa = q / (hzz * hzz * hww);
    double qb = q / (hww * hww * hzz);
    for (int32_t j = 0; j < n; ++j) {
      // <<z,w>> w_j drives the z side, <<w,z>> z_j the w side.
      ga[j] = s * ((zw.real() * w.re[j] - zw.imag() * w.im[j]) / den -
                   qa * z.re[j]);
      ga[n + j] = s * ((zw.real() * w.im[j] + zw.imag() * w.re[j]) / den -
                       qa * z.im[j]);
      gb[j] = s * ((zw.real() * z.re[j] + zw.imag() * z.im[j]) / den -
                   qb * w.re[j]);
      gb[n + j] = s * ((zw.real() * z.im[j] - zw.imag() * z.re[j]) / den -
                       qb * w.im[j]);
    }
    return true;
  }

  void apply_step(Table& t, NodeId u, const double* grad, double lr) const {
    double* x = t.x_row(u);
    double* y = t.y_row(u);
    double scale;
    if (mode == MetricMode::conformal) {
      double nsq = 0.0;
      for (int32_t j = 0; j < n; ++j) nsq += x[j] * x[j] + y[j] * y[j];
      double f = 1.0 - nsq;
      scale = f * f / 4.0;
    } else {
      double hzz = -1.0, dd = 0.0, dz_re = 0.0, dz_im = 0.0;
      for (int32_t j = 0; j < n; ++j) {
        hzz += x[j] * x[j] + y[j] * y[j];
        dd += grad[j] * grad[j] + grad[n + j] * grad[n + j];
        dz_re += grad[j] * x[j] + grad[n + j] * y[j];
        dz_im += grad[n + j] * x[j] - grad[j] * y[j];
      }
      double qv =
          -4.0 / (hzz * hzz) * (hzz * dd - (dz_re * dz_re + dz_im * dz_im));
      if (qv <= 0.0) return;
      scale = 1.0 / qv;
    }
    for (int32_t j = 0; j < n; ++j) {
      x[j] -= lr * scale * grad[j];
      y[j] -= lr * scale * grad[n + j];
    }
    project_row(x, y, n, eps_proj);
  }
};

}  // namespace detail

EmbeddingTable init_embeddings(int64_t m, int32_t n, uint64_t seed) {
  if (m < 1) throw std::invalid_argument("init_embeddings: m must be >= 1");
  if (n < 1) throw std::invalid_argument("init_embeddings: n must be >= 1");
  Rng rng(seed);
  detail::UnitBallSpace space{n, MetricMode::conformal, 1e-5};
  return space.init(m, rng);
}

namespace {

void check_batch(const EmbeddingTable& table, const LossBatch& batch) {
  auto valid = [&](NodeId v) { return v >= 0 && v < table.m; };
  if (!valid(batch.positive_child) || !valid(batch.positive_parent))
    throw std::invalid_argument("loss batch: positive id out of range");
  for (NodeId k : batch.negative_ids) {
    if (!valid(k)) throw std::invalid_argument("loss batch: negative id out of range");
    if (k == batch.positive_parent)
      throw std::invalid_argument("loss batch: positive parent among negatives");
    if (k == batch.positive_child)
      throw std::invalid_argument("loss batch: positive child among negatives");
  }
}

}  // namespace

double soft_ranking_loss(const EmbeddingTable& table, const LossBatch& batch,
                         bool include_positive) {
  check_batch(table, batch);
  NodeId p = batch.positive_child;
  double d_pq = detail::dist_unchecked(table.view(p),
                                       table.view(batch.positive_parent));
  double S = include_positive ? std::exp(-d_pq) : 1.0;
  for (NodeId k : batch.negative_ids)
    S += std::exp(-detail::dist_unchecked(table.view(p), table.view(k)));
  return d_pq + std::log(S);
}

LossPartials loss_distance_partials(
    double positive_distance, std::span<const double> denominator_distances,
    bool include_positive) {
  for (double d : denominator_distances)
    if (!std::isfinite(d))
      throw std::invalid_argument("loss_distance_partials: non-finite distance");
  if (!std::isfinite(positive_distance))
    throw std::invalid_argument("loss_distance_partials: non-finite distance");

  double S = include_positive ? std::exp(-positive_distance) : 1.0;
  for (double d : denominator_distances) S += std::exp(-d);
  LossPartials out;
  out.positive = 1.0;
  if (include_positive) out.positive -= std::exp(-positive_distance) / S;
  out.denominator.reserve(denominator_distances.size());
  for (double d : denominator_distances)
    out.denominator.push_back(-std::exp(-d) / S);
  return out;
}

ComplexPoint project(const ComplexPoint& z, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("project: eps must be in (0, 1)");
  detail::require_finite(z, "project");
  ComplexPoint out = z;
  detail::project_row(out.re.data(), out.im.data(), out.n(), eps);
  return out;
}

void rsgd_step(EmbeddingTable& table, const Graph& g, const LossBatch& batch,
               double lr, const TrainConfig& config) {
  config.validate();
  if (!(lr >= 0.0)) throw std::invalid_argument("rsgd_step: lr must be >= 0");
  if (g.node_count() != table.m)
    throw std::invalid_argument("rsgd_step: table/graph size mismatch");
  check_batch(table, batch);
  detail::UnitBallSpace space{table.n, config.metric_mode, config.eps_proj};
  detail::BatchScratch ws;
  detail::accumulate_batch(space, table, batch.positive_child,
                           batch.positive_parent, batch.negative_ids,
                           config.include_positive_in_denominator, ws);
  detail::apply_updates(space, table, lr, ws);
}

TrainResult train(const Graph& g, const TrainConfig& config) {
  detail::UnitBallSpace space{config.dim, config.metric_mode, config.eps_proj};
  auto out = detail::train_loop(space, g, config, 1);
  return {std::move(out.table), std::move(out.epoch_loss)};
}

TrainResult train_parallel(const Graph& g, const TrainConfig& config,
                           int workers) {
  detail::UnitBallSpace space{config.dim, config.metric_mode, config.eps_proj};
  auto out = detail::train_loop(space, g, config, workers);
  return {std::move(out.table), std::move(out.epoch_loss)};
}

void save_checkpoint(const EmbeddingTable& table,
                     const std::vector<std::string>& vocab,
                     const std::string& path) {
  if (static_cast<int64_t>(vocab.size()) != table.m)
    throw std::invalid_argument("save_checkpoint: vocab size mismatch");
  detail::TableText text;
  text.tag = "cxhyp-v1";
  text.m = table.m;
  text.n = table.n;
  text.vocab = vocab;
  text.values.resize(table.m * 2 * table.n);
  for (int64_t i = 0; i < table.m; ++i) {
    double* row = text.values.data() + i * 2 * table.n;
    const double* x = table.xs.data() + i * table.n;
    const double* y = table.ys.data() + i * table.n;
    std::copy(x, x + table.n, row);
    std::copy(y, y + table.n, row + table.n);
  }
  detail::save_table_text(text, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  detail::TableText text = detail::load_table_text(path, "cxhyp-v1");
  Checkpoint ck;
  ck.vocab = std::move(text.vocab);
  ck.table = EmbeddingTable(text.m, text.n);
  for (int64_t i = 0; i < text.m; ++i) {
    const double* row = text.values.data() + i * 2 * text.n;
    std::copy(row, row + text.n, ck.table.x_row(i));
    std::copy(row + text.n, row + 2 * text.n, ck.table.y_row(i));
  }
  return ck;
}

}  // namespace cxhyp
