#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "cxhyp/eval.hpp"
#include "cxhyp/gradients.hpp"
#include "cxhyp/model.hpp"

using namespace cxhyp;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  REQUIRE(static_cast<bool>(out));
}

template <class E, class F>
std::string error_of(F fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  FAIL("expected exception");
  return {};
}

void set_row(EmbeddingTable& t, int64_t i, std::vector<double> re,
             std::vector<double> im) {
  std::copy(re.begin(), re.end(), t.x_row(i));
  std::copy(im.begin(), im.end(), t.y_row(i));
}

double pair_distance(const EmbeddingTable& t, NodeId a, NodeId b) {
  ComplexPoint za = ComplexPoint::zero(t.n), zb = ComplexPoint::zero(t.n);
  for (int32_t j = 0; j < t.n; ++j) {
    za.re[j] = t.view(a).re[j];
    za.im[j] = t.view(a).im[j];
    zb.re[j] = t.view(b).re[j];
    zb.im[j] = t.view(b).im[j];
  }
  return distance(za, zb);
}

double max_row_norm_sq(const EmbeddingTable& t) {
  double worst = 0.0;
  for (int64_t i = 0; i < t.m; ++i) {
    double nsq = 0.0;
    for (int32_t j = 0; j < t.n; ++j)
      nsq += t.view(i).re[j] * t.view(i).re[j] +
             t.view(i).im[j] * t.view(i).im[j];
    worst = std::max(worst, nsq);
  }
  return worst;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("init draws real parts before imaginary parts, row by row") {
  EmbeddingTable t = init_embeddings(2, 3, 7);
  Rng rng(7);
  std::vector<double> draws(12);
  for (auto& d : draws) d = rng.uniform(-1e-3, 1e-3);
  for (int j = 0; j < 3; ++j) {
    CHECK(t.x_row(0)[j] == draws[j]);
    CHECK(t.y_row(0)[j] == draws[3 + j]);
    CHECK(t.x_row(1)[j] == draws[6 + j]);
    CHECK(t.y_row(1)[j] == draws[9 + j]);
  }

  EmbeddingTable again = init_embeddings(2, 3, 7);
  CHECK(t == again);
  EmbeddingTable other = init_embeddings(2, 3, 8);
  CHECK(t != other);
  CHECK(max_row_norm_sq(t) < 3 * 2e-6);

  CHECK_THROWS_AS(init_embeddings(0, 3, 7), std::invalid_argument);
  CHECK_THROWS_AS(init_embeddings(2, 0, 7), std::invalid_argument);
}

TEST_CASE("loss at the origin is log of the denominator size") {
  EmbeddingTable t(5, 2);
  LossBatch b;
  b.positive_child = 0;
  b.positive_parent = 1;
  b.negative_ids = {};
  CHECK(soft_ranking_loss(t, b) == doctest::Approx(0.0));
  b.negative_ids = {2};
  CHECK(soft_ranking_loss(t, b) == doctest::Approx(0.6931471805599453));
  b.negative_ids = {2, 3, 4};
  CHECK(soft_ranking_loss(t, b) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));
  // At the origin the constant self term equals the positive's e^0 exactly.
  CHECK(soft_ranking_loss(t, b, false) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("loss on a radial configuration") {
  // d(0, tanh(s/2) e_1) = s, so distances 1 and 2 by construction.
  EmbeddingTable t(3, 1);
  set_row(t, 1, {std::tanh(0.5)}, {0.0});
  set_row(t, 2, {std::tanh(1.0)}, {0.0});
  LossBatch b;
  b.positive_child = 0;
  b.positive_parent = 1;
  b.negative_ids = {2};
  CHECK(soft_ranking_loss(t, b) ==
        doctest::Approx(0.3132616875182228).epsilon(1e-12));

  // The self variant swaps the positive's e^{-1} for the constant e^0.
  CHECK(soft_ranking_loss(t, b, false) ==
        doctest::Approx(1.1269280110429727).epsilon(1e-12));
}

TEST_CASE("loss batch validation") {
  EmbeddingTable t(4, 1);
  LossBatch b;
  b.positive_child = 0;
  b.positive_parent = 1;
  b.negative_ids = {0, 2};
  CHECK(error_of<std::invalid_argument>([&] { soft_ranking_loss(t, b); })
            .find("child among negatives") != std::string::npos);
  b.negative_ids = {2, 1};
  CHECK(error_of<std::invalid_argument>([&] { soft_ranking_loss(t, b); })
            .find("parent among negatives") != std::string::npos);
  b.negative_ids = {2, 7};
  CHECK_THROWS_AS(soft_ranking_loss(t, b), std::invalid_argument);
  b.negative_ids = {2};
  b.positive_parent = 9;
  CHECK_THROWS_AS(soft_ranking_loss(t, b), std::invalid_argument);
}

TEST_CASE("chain rule coefficients") {
  std::vector<double> dens = {0.0, 2.0};
  LossPartials wp = loss_distance_partials(0.7, dens);
  double S = std::exp(-0.7) + 1.0 + std::exp(-2.0);
  CHECK(wp.positive == doctest::Approx(1.0 - std::exp(-0.7) / S));
  CHECK(wp.denominator[0] == doctest::Approx(-1.0 / S));
  // All coefficients together cancel: scaling every distance by a common
  // factor near 1 leaves this loss stationary when the pair is in both terms.
  double total = wp.positive;
  for (double c : wp.denominator) total += c;
  CHECK(std::abs(total) < 1e-14);

  // Self variant: the positive keeps coefficient 1 and the members leave the
  // constant term's share 1/S on the table.
  LossPartials lp = loss_distance_partials(0.7, dens, false);
  CHECK(lp.positive == 1.0);
  CHECK(lp.denominator[0] ==
        doctest::Approx(-0.4683105308334812).epsilon(1e-14));
  CHECK(lp.denominator[1] ==
        doctest::Approx(-0.06337893833303762).epsilon(1e-14));
  double S2 = 2.0 + std::exp(-2.0);
  CHECK(lp.denominator[0] + lp.denominator[1] ==
        doctest::Approx(-1.0 + 1.0 / S2).epsilon(1e-14));

  std::vector<double> bad = {0.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(loss_distance_partials(0.5, bad), std::invalid_argument);
  CHECK_THROWS_AS(loss_distance_partials(
                      std::numeric_limits<double>::quiet_NaN(), dens),
                  std::invalid_argument);
}

TEST_CASE("projection pulls escaped points back") {
  ComplexPoint inside({0.2, -0.3}, {0.1, 0.0});
  ComplexPoint same = project(inside, 1e-5);
  CHECK(same.re == inside.re);
  CHECK(same.im == inside.im);

  ComplexPoint outside({3.0, 4.0}, {0.0, 0.0});
  ComplexPoint back = project(outside, 1e-5);
  CHECK(back.re[0] == doctest::Approx(0.6 * (1.0 - 1e-5)).epsilon(1e-15));
  CHECK(back.re[1] == doctest::Approx(0.8 * (1.0 - 1e-5)).epsilon(1e-15));
  CHECK(ball_norm_sq(back) < 1.0);

  ComplexPoint boundary({1.0}, {0.0});
  ComplexPoint pulled = project(boundary, 1e-3);
  CHECK(pulled.re[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-15));

  CHECK_THROWS_AS(project(inside, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(project(inside, 1.0), std::invalid_argument);
}

TEST_CASE("zero learning rate leaves the table alone") {
  Graph g = balanced_tree(2, 2);
  EmbeddingTable t = init_embeddings(g.node_count(), 2, 3);
  EmbeddingTable before = t;
  LossBatch b;
  b.positive_child = 3;
  b.positive_parent = 1;
  b.negative_ids = {5, 6};
  TrainConfig cfg;
  cfg.dim = 2;
  rsgd_step(t, g, b, 0.0, cfg);
  CHECK(t == before);
}

TEST_CASE("a step pulls the positive pair together") {
  Graph g = graph_from_pairs({{"a", "b"}});
  EmbeddingTable t(2, 1);
  set_row(t, 0, {0.2}, {0.0});
  set_row(t, 1, {-0.3}, {0.1});
  double before = pair_distance(t, 0, 1);
  LossBatch b;
  b.positive_child = 0;
  b.positive_parent = 1;
  TrainConfig cfg;
  cfg.dim = 1;

  // An annealed positive with nothing to rank against is a no-op.
  EmbeddingTable untouched = t;
  rsgd_step(t, g, b, 0.1, cfg);
  CHECK(t == untouched);

  cfg.include_positive_in_denominator = false;
  rsgd_step(t, g, b, 0.1, cfg);
  CHECK(pair_distance(t, 0, 1) < before);
}

TEST_CASE("step equals metric-scaled euclidean gradient of the batch loss") {
  Graph g = graph_from_pairs({{"a", "b"}, {"c", "d"}});
  EmbeddingTable t = init_embeddings(4, 2, 11);
  // Spread the nodes out so no pair is near-singular.
  set_row(t, 0, {0.10, 0.05}, {-0.20, 0.00});
  set_row(t, 1, {-0.30, 0.10}, {0.15, 0.25});
  set_row(t, 2, {0.40, -0.10}, {0.00, -0.30});
  set_row(t, 3, {-0.05, -0.35}, {0.20, 0.10});

  LossBatch b;
  b.positive_child = 0;
  b.positive_parent = 1;
  b.negative_ids = {2, 3};

  const double lr = 0.05;
  const double h = 1e-6;
  EmbeddingTable stepped = t;
  TrainConfig cfg;
  cfg.dim = 2;
  rsgd_step(stepped, g, b, lr, cfg);

  for (NodeId v : {0, 1, 2, 3}) {
    double scale = metric_scale(t.view(v), MetricMode::conformal);
    for (int32_t j = 0; j < 2; ++j) {
      for (int part = 0; part < 2; ++part) {
        EmbeddingTable hi = t, lo = t;
        double* phi = part == 0 ? hi.x_row(v) : hi.y_row(v);
        double* plo = part == 0 ? lo.x_row(v) : lo.y_row(v);
        phi[j] += h;
        plo[j] -= h;
        double grad =
            (soft_ranking_loss(hi, b) - soft_ranking_loss(lo, b)) / (2 * h);
        double got = part == 0 ? stepped.view(v).re[j] : stepped.view(v).im[j];
        double want = (part == 0 ? t.view(v).re[j] : t.view(v).im[j]) -
                      lr * scale * grad;
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("steps never leave the ball") {
  Graph g = compressed_graph(12, 1, 2);
  EmbeddingTable t = init_embeddings(12, 2, 5);
  TrainConfig cfg;
  cfg.dim = 2;
  Rng rng(17);
  std::vector<NodeId> negs;
  for (int iter = 0; iter < 400; ++iter) {
    const Edge& e = g.edges()[rng.bounded(g.edge_count())];
    LossBatch b;
    b.positive_child = e.child;
    b.positive_parent = e.parent;
    detail::sample_negatives(g, e.child, 5, rng, b.negative_ids);
    rsgd_step(t, g, b, 5.0, cfg);
    REQUIRE(max_row_norm_sq(t) < 1.0);
  }
}

TEST_CASE("negative sampling avoids neighbours and self") {
  Graph g = balanced_tree(2, 2);
  Rng rng(9);
  std::vector<NodeId> out;
  detail::sample_negatives(g, 0, 40, rng, out);
  CHECK(out.size() == 40);
  for (NodeId k : out) {
    CHECK(k != 0);
    CHECK(!g.adjacent(0, k));
  }

  // In a triangle every other node is adjacent: nothing to sample.
  Graph tri = graph_from_pairs({{"a", "b"}, {"a", "c"}, {"b", "c"}});
  out.clear();
  detail::sample_negatives(tri, 0, 4, rng, out);
  CHECK(out.empty());
}

TEST_CASE("training is deterministic and its loss trends down") {
  Graph g = balanced_tree(2, 3);
  TrainConfig cfg;
  cfg.dim = 2;
  cfg.epochs = 40;
  cfg.negatives = 8;
  cfg.seed = 4;
  TrainResult a = train(g, cfg);
  TrainResult b = train(g, cfg);
  CHECK(a.table == b.table);
  CHECK(a.epoch_loss == b.epoch_loss);
  CHECK(a.epoch_loss.size() == 40);
  CHECK(max_row_norm_sq(a.table) < 1.0);

  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 5; ++i) {
    head += a.epoch_loss[i];
    tail += a.epoch_loss[35 + i];
  }
  CHECK(tail < head);

  TrainResult c = train_parallel(g, cfg, 1);
  CHECK(c.table == a.table);

  cfg.seed = 5;
  TrainResult d = train(g, cfg);
  CHECK(d.table != a.table);
}

TEST_CASE("a small tree embeds with near-perfect ranks") {
  Graph g = balanced_tree(3, 2);
  TrainConfig cfg;  // stock schedule and negative count
  cfg.dim = 5;
  cfg.seed = 1;
  TrainResult r = train(g, cfg);

  RankingTask task;
  task.mode = EvalMode::reconstruction;
  task.eval_graph = &g;
  EvalReport rep = evaluate(r.table, task, {10});
  CHECK(rep.map >= 0.95);
  CHECK(rep.mrr >= 0.95);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.burnin_epochs = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.burnin_factor = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.negatives = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eps_proj = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("checkpoints round trip bit-exactly") {
  EmbeddingTable t = init_embeddings(6, 3, 13);
  set_row(t, 2, {0.12345678901234567, -0.9, 0.3}, {0.2, 0.1, -0.05});
  std::vector<std::string> vocab = {"root", "a.b", "c d", "x", "y", "z"};
  save_checkpoint(t, vocab, "tm_ckpt.tsv");
  Checkpoint ck = load_checkpoint("tm_ckpt.tsv");
  CHECK(ck.table == t);
  CHECK(ck.vocab == vocab);

  std::vector<std::string> wrong = {"only", "two"};
  CHECK_THROWS_AS(save_checkpoint(t, wrong, "tm_ckpt2.tsv"),
                  std::invalid_argument);
}

TEST_CASE("checkpoint parsing") {
  write_file("tm_fix.tsv",
             "cxhyp-v1 2 1\n"
             "a\t0.3 0.4\n"
             "b\t-0.1 0\n");
  Checkpoint ck = load_checkpoint("tm_fix.tsv");
  CHECK(ck.vocab == std::vector<std::string>{"a", "b"});
  CHECK(ck.table.m == 2);
  CHECK(ck.table.n == 1);
  CHECK(ck.table.x_row(0)[0] == 0.3);
  CHECK(ck.table.y_row(0)[0] == 0.4);
  CHECK(ck.table.x_row(1)[0] == -0.1);

  write_file("tm_trunc.tsv", "cxhyp-v1 3 1\na\t0.3 0.4\n");
  CHECK(error_of<std::runtime_error>([] { load_checkpoint("tm_trunc.tsv"); })
            .find("truncated") != std::string::npos);

  write_file("tm_tag.tsv", "poincare-v1 1 1\na\t0.3 0.4\n");
  CHECK(error_of<std::runtime_error>([] { load_checkpoint("tm_tag.tsv"); })
            .find("cxhyp-v1") != std::string::npos);

  write_file("tm_float.tsv", "cxhyp-v1 1 1\na\t0.3 oops\n");
  CHECK(error_of<std::runtime_error>([] { load_checkpoint("tm_float.tsv"); })
            .find("bad float") != std::string::npos);

  write_file("tm_norm.tsv", "cxhyp-v1 1 1\nbig\t0.8 0.7\n");
  std::string msg =
      error_of<std::runtime_error>([] { load_checkpoint("tm_norm.tsv"); });
  CHECK(msg.find("big") != std::string::npos);
  CHECK(msg.find("norm") != std::string::npos);

  write_file("tm_junk.tsv", "cxhyp-v1 1 1\na\t0.3 0.4 0.5\n");
  CHECK(error_of<std::runtime_error>([] { load_checkpoint("tm_junk.tsv"); })
            .find("trailing junk") != std::string::npos);

  write_file("tm_extra.tsv", "cxhyp-v1 1 1\na\t0.3 0.4\nb\t0.1 0\n");
  CHECK_THROWS_AS(load_checkpoint("tm_extra.tsv"), std::runtime_error);

  CHECK_THROWS_AS(load_checkpoint("tm_missing.tsv"), std::runtime_error);
}

}  // TEST_SUITE
