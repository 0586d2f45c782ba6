#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cxhyp/eval.hpp"
#include "cxhyp/graph.hpp"
#include "cxhyp/model.hpp"
#include "cxhyp/poincare.hpp"
#include "cxhyp/table_io.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

int default_workers() {
  if (const char* env = std::getenv("CXHYP_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    std::cerr << "warning: ignoring invalid CXHYP_WORKERS=" << env << "\n";
  }
  return 1;
}

// --config FILE supplies defaults for any long flag (keys without the
// leading dashes); flags given on the command line win. The file is read in
// a pre-pass so the values are in place before CLI11 parses.
json read_config_file(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) path = argv[i + 1];
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  }
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(in);
  if (!j.is_object()) throw std::runtime_error(path + ": config must be a JSON object");
  return j;
}

template <typename T>
void from_config(const json& cfg, const char* key, T& value) {
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

std::vector<int32_t> parse_hits(const std::string& text) {
  std::vector<int32_t> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string part = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != part.size() || v < 1)
      throw CLI::ValidationError("--hits", "bad entry \"" + part + "\"");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Translates token pairs onto a fixed vocabulary (checkpoint row order),
// complaining about the first token the checkpoint does not know.
cxhyp::Graph graph_on_vocab(
    const std::vector<std::string>& vocab,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::string& what) {
  std::unordered_map<std::string, cxhyp::NodeId> ids;
  ids.reserve(vocab.size());
  for (size_t i = 0; i < vocab.size(); ++i)
    ids.emplace(vocab[i], static_cast<cxhyp::NodeId>(i));
  std::vector<cxhyp::Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [c, p] : pairs) {
    auto ci = ids.find(c);
    if (ci == ids.end())
      throw std::runtime_error(what + ": token \"" + c +
                               "\" missing from checkpoint vocabulary");
    auto pi = ids.find(p);
    if (pi == ids.end())
      throw std::runtime_error(what + ": token \"" + p +
                               "\" missing from checkpoint vocabulary");
    edges.push_back({ci->second, pi->second});
  }
  return cxhyp::Graph(vocab, std::move(edges));
}

std::string peek_checkpoint_tag(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string tag;
  in >> tag;
  return tag;
}

struct GenerateArgs {
  std::string kind, out;
  int r = 2, h = 3, m = 100, k = 2;
  uint64_t seed = 0;
  bool delta = false;
};

int cmd_generate(const GenerateArgs& a) {
  if (a.kind != "balanced_tree" && a.kind != "compressed_graph")
    throw CLI::ValidationError("--kind",
                               "expected balanced_tree or compressed_graph");
  cxhyp::Graph g = a.kind == "balanced_tree"
                       ? cxhyp::balanced_tree(a.r, a.h)
                       : cxhyp::compressed_graph(a.m, a.k, a.seed);
  cxhyp::save_edge_list(g, a.out);
  ordered_json params;
  if (a.kind == "balanced_tree") {
    params["r"] = a.r;
    params["h"] = a.h;
  } else {
    params["m"] = a.m;
    params["k"] = a.k;
    params["seed"] = a.seed;
  }
  ordered_json out;
  out["schema"] = "v1";
  out["command"] = "generate";
  out["config"] = {{"kind", a.kind}, {"params", params}, {"out", a.out}};
  out["nodes"] = g.node_count();
  out["edges"] = g.edge_count();
  out["delta"] = nullptr;
  if (a.delta) out["delta"] = cxhyp::delta_hyperbolicity_exact(g);
  std::cout << out.dump() << "\n";
  return 0;
}

struct SplitArgs {
  std::string edges, train_out, valid_out, test_out;
  double train_frac = 0.90, valid_frac = 0.05, test_frac = 0.05;
  uint64_t seed = 0;
};

int cmd_split(const SplitArgs& a) {
  cxhyp::Graph g = cxhyp::load_edge_list(a.edges);
  cxhyp::SplitSpec spec{a.train_frac, a.valid_frac, a.test_frac, a.seed};
  cxhyp::EdgeSplit split = cxhyp::split_edges(g, spec);
  auto dump = [&](const std::vector<cxhyp::Edge>& edges,
                  const std::string& path) {
    if (path.empty() && !edges.empty())
      throw std::runtime_error("split produced edges with no output path");
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write edge list: " + path);
    for (const cxhyp::Edge& e : edges)
      out << g.token(e.child) << '\t' << g.token(e.parent) << '\n';
  };
  dump(split.train, a.train_out);
  dump(split.valid, a.valid_out);
  dump(split.test, a.test_out);
  ordered_json out;
  out["schema"] = "v1";
  out["command"] = "split";
  out["config"] = {{"edges", a.edges},
                   {"train-frac", a.train_frac},
                   {"valid-frac", a.valid_frac},
                   {"test-frac", a.test_frac},
                   {"seed", a.seed},
                   {"train-out", a.train_out},
                   {"valid-out", a.valid_out},
                   {"test-out", a.test_out}};
  out["counts"] = {{"train", split.train.size()},
                   {"valid", split.valid.size()},
                   {"test", split.test.size()}};
  std::cout << out.dump() << "\n";
  return 0;
}

struct TrainArgs {
  std::string edges, model = "unitball", out, metric_mode = "conformal";
  std::string denominator = "positive";
  cxhyp::TrainConfig cfg;
  int workers = 1;
};

int cmd_train(TrainArgs& a) {
  if (a.metric_mode == "conformal") {
    a.cfg.metric_mode = cxhyp::MetricMode::conformal;
  } else if (a.metric_mode == "quadratic") {
    a.cfg.metric_mode = cxhyp::MetricMode::quadratic_form;
  } else {
    throw CLI::ValidationError("--metric-mode",
                               "expected conformal or quadratic");
  }
  if (a.model != "unitball" && a.model != "poincare")
    throw CLI::ValidationError("--model", "expected unitball or poincare");
  if (a.denominator != "positive" && a.denominator != "self")
    throw CLI::ValidationError("--denominator", "expected positive or self");
  a.cfg.include_positive_in_denominator = a.denominator == "positive";
  a.cfg.validate();

  cxhyp::Graph g = cxhyp::load_edge_list(a.edges);
  auto t0 = std::chrono::steady_clock::now();
  std::vector<double> trace;
  if (a.model == "unitball") {
    cxhyp::TrainResult r =
        a.workers > 1 ? cxhyp::train_parallel(g, a.cfg, a.workers)
                      : cxhyp::train(g, a.cfg);
    cxhyp::save_checkpoint(r.table, g.tokens(), a.out);
    trace = std::move(r.epoch_loss);
  } else if (a.model == "poincare") {
    cxhyp::PoincareTrainResult r =
        a.workers > 1 ? cxhyp::poincare_rsgd_train_parallel(g, a.cfg, a.workers)
                      : cxhyp::poincare_rsgd_train(g, a.cfg);
    cxhyp::save_poincare_checkpoint(r.table, g.tokens(), a.out);
    trace = std::move(r.epoch_loss);
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();

  ordered_json out;
  out["schema"] = "v1";
  out["command"] = "train";
  out["config"] = {{"edges", a.edges},
                   {"model", a.model},
                   {"dim", a.cfg.dim},
                   {"epochs", a.cfg.epochs},
                   {"lr", a.cfg.lr},
                   {"burnin", a.cfg.burnin_epochs},
                   {"burnin-factor", a.cfg.burnin_factor},
                   {"negatives", a.cfg.negatives},
                   {"eps-proj", a.cfg.eps_proj},
                   {"metric-mode", a.metric_mode},
                   {"seed", a.cfg.seed},
                   {"batch-size", a.cfg.batch_size},
                   {"denominator", a.denominator},
                   {"workers", a.workers},
                   {"out", a.out}};
  out["nodes"] = g.node_count();
  out["edges"] = g.edge_count();
  out["epochs"] = trace.size();
  out["epoch_loss"] = trace;
  out["wall_time_sec"] = secs;
  out["checkpoint"] = a.out;
  std::cout << out.dump() << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint, edges, mode = "reconstruction";
  std::string train_edges, original, hits = "1,3,10", buckets;
  int workers = 1;
};

int cmd_eval(const EvalArgs& a) {
  if (a.mode != "reconstruction" && a.mode != "link")
    throw CLI::ValidationError("--mode", "expected reconstruction or link");
  std::vector<int32_t> hits_ns = parse_hits(a.hits);

  std::string tag = peek_checkpoint_tag(a.checkpoint);
  std::vector<std::string> vocab;
  cxhyp::EmbeddingTable ball_table;
  cxhyp::RealTable real_table;
  if (tag == "cxhyp-v1") {
    cxhyp::Checkpoint ck = cxhyp::load_checkpoint(a.checkpoint);
    vocab = std::move(ck.vocab);
    ball_table = std::move(ck.table);
  } else if (tag == "poincare-v1") {
    cxhyp::PoincareCheckpoint ck = cxhyp::load_poincare_checkpoint(a.checkpoint);
    vocab = std::move(ck.vocab);
    real_table = std::move(ck.table);
  } else {
    throw std::runtime_error(a.checkpoint + ": unknown checkpoint tag \"" +
                             tag + "\"");
  }

  cxhyp::Graph eval_graph =
      graph_on_vocab(vocab, cxhyp::load_edge_pairs(a.edges), a.edges);
  cxhyp::RankingTask task;
  task.eval_graph = &eval_graph;

  cxhyp::Graph train_graph;
  if (a.mode == "link") {
    task.mode = cxhyp::EvalMode::link_prediction;
    if (a.train_edges.empty())
      throw CLI::ValidationError("--train-edges",
                                 "required in link mode");
    train_graph = graph_on_vocab(vocab, cxhyp::load_edge_pairs(a.train_edges),
                                 a.train_edges);
    task.train_graph = &train_graph;
  }

  cxhyp::Graph original_graph;
  const cxhyp::Graph* original = &eval_graph;
  if (!a.original.empty()) {
    original_graph = graph_on_vocab(
        vocab, cxhyp::load_edge_pairs(a.original), a.original);
    original = &original_graph;
  }

  cxhyp::EvalReport report;
  if (!a.buckets.empty()) {
    std::vector<cxhyp::BucketRange> buckets = cxhyp::parse_buckets(a.buckets);
    report = tag == "cxhyp-v1"
                 ? cxhyp::bucketed_1n_report(ball_table, task, buckets,
                                             hits_ns, *original, a.workers)
                 : cxhyp::bucketed_1n_report(real_table, task, buckets,
                                             hits_ns, *original, a.workers);
  } else {
    report = tag == "cxhyp-v1"
                 ? cxhyp::evaluate(ball_table, task, hits_ns, a.workers)
                 : cxhyp::evaluate(real_table, task, hits_ns, a.workers);
  }

  ordered_json out = ordered_json::parse(report.to_json());
  ordered_json with_cfg;
  with_cfg["schema"] = "v1";
  with_cfg["command"] = "eval";
  with_cfg["config"] = {{"checkpoint", a.checkpoint},
                        {"edges", a.edges},
                        {"mode", a.mode},
                        {"train-edges", a.train_edges},
                        {"original", a.original},
                        {"hits", a.hits},
                        {"buckets", a.buckets},
                        {"workers", a.workers}};
  for (auto& [k, v] : out.items())
    if (k != "schema") with_cfg[k] = v;
  std::cout << with_cfg.dump() << "\n";
  return 0;
}

struct HypArgs {
  std::string edges, mode = "exact";
  int64_t samples = 100000;
  uint64_t seed = 0;
  int node_cap = 1500;
  int workers = 1;
};

int cmd_hyperbolicity(const HypArgs& a) {
  if (a.mode != "exact" && a.mode != "sampled")
    throw CLI::ValidationError("--mode", "expected exact or sampled");
  cxhyp::Graph g = cxhyp::load_edge_list(a.edges);
  ordered_json cfg = {{"edges", a.edges},      {"mode", a.mode},
                      {"samples", a.samples},  {"seed", a.seed},
                      {"node-cap", a.node_cap}, {"workers", a.workers}};
  std::cerr << "config: " << cfg.dump() << "\n";
  double delta =
      a.mode == "exact"
          ? cxhyp::delta_hyperbolicity_exact(g, a.node_cap, a.workers)
          : cxhyp::delta_hyperbolicity_sampled(g, a.samples, a.seed,
                                               a.workers);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", delta);
  std::cout << buf << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchy embeddings in the complex-hyperbolic unit ball"};
  app.require_subcommand(1);
  // Long-form help only; generate's --h (tree depth) needs the short name.
  app.set_help_flag("--help", "print help and exit");

  try {
    json cfg = read_config_file(argc, argv);
    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON file with defaults for the flags below");

    GenerateArgs gen;
    from_config(cfg, "kind", gen.kind);
    from_config(cfg, "r", gen.r);
    from_config(cfg, "h", gen.h);
    from_config(cfg, "m", gen.m);
    from_config(cfg, "k", gen.k);
    from_config(cfg, "seed", gen.seed);
    from_config(cfg, "out", gen.out);
    from_config(cfg, "delta", gen.delta);
    CLI::App* c_gen = app.add_subcommand("generate", "Write a synthetic graph");
    c_gen->set_help_flag("--help", "print help and exit");
    c_gen->add_option("--kind", gen.kind, "balanced_tree or compressed_graph")
        ->required(!cfg.contains("kind"));
    c_gen->add_option("--r", gen.r, "branching factor (balanced_tree)");
    c_gen->add_option("--h", gen.h, "depth (balanced_tree)");
    c_gen->add_option("--m", gen.m, "node count (compressed_graph)");
    c_gen->add_option("--k", gen.k, "tree count (compressed_graph)");
    c_gen->add_option("--seed", gen.seed, "generator seed");
    c_gen->add_option("--out", gen.out, "output edge list (TSV)")
        ->required(!cfg.contains("out"));
    c_gen->add_flag("--delta", gen.delta, "report exact delta-hyperbolicity");
    c_gen->add_option("--config", config_path, "JSON defaults file");

    SplitArgs spl;
    from_config(cfg, "edges", spl.edges);
    from_config(cfg, "train-frac", spl.train_frac);
    from_config(cfg, "valid-frac", spl.valid_frac);
    from_config(cfg, "test-frac", spl.test_frac);
    from_config(cfg, "seed", spl.seed);
    from_config(cfg, "train-out", spl.train_out);
    from_config(cfg, "valid-out", spl.valid_out);
    from_config(cfg, "test-out", spl.test_out);
    CLI::App* c_spl = app.add_subcommand("split", "Split an edge list");
    c_spl->set_help_flag("--help", "print help and exit");
    c_spl->add_option("--edges", spl.edges, "input edge list")
        ->required(!cfg.contains("edges"));
    c_spl->add_option("--train-frac", spl.train_frac, "training fraction");
    c_spl->add_option("--valid-frac", spl.valid_frac, "validation fraction");
    c_spl->add_option("--test-frac", spl.test_frac, "test fraction");
    c_spl->add_option("--seed", spl.seed, "shuffle seed");
    c_spl->add_option("--train-out", spl.train_out, "training edges out")
        ->required(!cfg.contains("train-out"));
    c_spl->add_option("--valid-out", spl.valid_out, "validation edges out");
    c_spl->add_option("--test-out", spl.test_out, "test edges out");
    c_spl->add_option("--config", config_path, "JSON defaults file");

    TrainArgs tr;
    tr.workers = default_workers();
    from_config(cfg, "edges", tr.edges);
    from_config(cfg, "model", tr.model);
    from_config(cfg, "out", tr.out);
    from_config(cfg, "dim", tr.cfg.dim);
    from_config(cfg, "epochs", tr.cfg.epochs);
    from_config(cfg, "lr", tr.cfg.lr);
    from_config(cfg, "burnin", tr.cfg.burnin_epochs);
    from_config(cfg, "burnin-factor", tr.cfg.burnin_factor);
    from_config(cfg, "negatives", tr.cfg.negatives);
    from_config(cfg, "eps-proj", tr.cfg.eps_proj);
    from_config(cfg, "metric-mode", tr.metric_mode);
    from_config(cfg, "seed", tr.cfg.seed);
    from_config(cfg, "batch-size", tr.cfg.batch_size);
    from_config(cfg, "denominator", tr.denominator);
    from_config(cfg, "workers", tr.workers);
    CLI::App* c_tr = app.add_subcommand("train", "Train embeddings");
    c_tr->set_help_flag("--help", "print help and exit");
    c_tr->add_option("--edges", tr.edges, "training edge list")
        ->required(!cfg.contains("edges"));
    c_tr->add_option("--model", tr.model, "unitball or poincare");
    c_tr->add_option("--out", tr.out, "checkpoint path")
        ->required(!cfg.contains("out"));
    c_tr->add_option("--dim", tr.cfg.dim, "complex dimension n");
    c_tr->add_option("--epochs", tr.cfg.epochs, "training epochs");
    c_tr->add_option("--lr", tr.cfg.lr, "peak learning rate");
    c_tr->add_option("--burnin", tr.cfg.burnin_epochs, "burn-in epochs");
    c_tr->add_option("--burnin-factor", tr.cfg.burnin_factor,
                     "burn-in lr divisor");
    c_tr->add_option("--negatives", tr.cfg.negatives, "negatives per edge");
    c_tr->add_option("--eps-proj", tr.cfg.eps_proj, "projection margin");
    c_tr->add_option("--metric-mode", tr.metric_mode,
                     "conformal or quadratic");
    c_tr->add_option("--seed", tr.cfg.seed, "training seed");
    c_tr->add_option("--batch-size", tr.cfg.batch_size, "edges per update");
    c_tr->add_option("--denominator", tr.denominator,
                     "extra denominator slot: positive (the pair itself) "
                     "or self (a constant e^0 term)");
    c_tr->add_option("--workers", tr.workers, "parallel training workers");
    c_tr->add_option("--config", config_path, "JSON defaults file");

    EvalArgs ev;
    ev.workers = default_workers();
    from_config(cfg, "checkpoint", ev.checkpoint);
    from_config(cfg, "edges", ev.edges);
    from_config(cfg, "mode", ev.mode);
    from_config(cfg, "train-edges", ev.train_edges);
    from_config(cfg, "original", ev.original);
    from_config(cfg, "hits", ev.hits);
    from_config(cfg, "buckets", ev.buckets);
    from_config(cfg, "workers", ev.workers);
    CLI::App* c_ev = app.add_subcommand("eval", "Score a checkpoint");
    c_ev->set_help_flag("--help", "print help and exit");
    c_ev->add_option("--checkpoint", ev.checkpoint, "trained checkpoint")
        ->required(!cfg.contains("checkpoint"));
    c_ev->add_option("--edges", ev.edges, "eval edge list")
        ->required(!cfg.contains("edges"));
    c_ev->add_option("--mode", ev.mode, "reconstruction or link");
    c_ev->add_option("--train-edges", ev.train_edges,
                     "observed edges (link mode filter)");
    c_ev->add_option("--original", ev.original,
                     "pre-closure edges for bucket parent counts");
    c_ev->add_option("--hits", ev.hits, "comma list of Hits@N cutoffs");
    c_ev->add_option("--buckets", ev.buckets,
                     "parent-count buckets, e.g. 1,2-5,6-10,11-20,20+");
    c_ev->add_option("--workers", ev.workers, "parallel eval workers");
    c_ev->add_option("--config", config_path, "JSON defaults file");

    HypArgs hy;
    hy.workers = default_workers();
    from_config(cfg, "edges", hy.edges);
    from_config(cfg, "mode", hy.mode);
    from_config(cfg, "samples", hy.samples);
    from_config(cfg, "seed", hy.seed);
    from_config(cfg, "node-cap", hy.node_cap);
    from_config(cfg, "workers", hy.workers);
    CLI::App* c_hy =
        app.add_subcommand("hyperbolicity", "Four-point delta of a graph");
    c_hy->set_help_flag("--help", "print help and exit");
    c_hy->add_option("--edges", hy.edges, "input edge list")
        ->required(!cfg.contains("edges"));
    c_hy->add_option("--mode", hy.mode, "exact or sampled");
    c_hy->add_option("--samples", hy.samples, "tuples in sampled mode");
    c_hy->add_option("--seed", hy.seed, "sampling seed");
    c_hy->add_option("--node-cap", hy.node_cap,
                     "exact-mode node count refusal threshold");
    c_hy->add_option("--workers", hy.workers, "parallel BFS/scan workers");
    c_hy->add_option("--config", config_path, "JSON defaults file");

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }

    if (c_gen->parsed()) return cmd_generate(gen);
    if (c_spl->parsed()) return cmd_split(spl);
    if (c_tr->parsed()) return cmd_train(tr);
    if (c_ev->parsed()) return cmd_eval(ev);
    if (c_hy->parsed()) return cmd_hyperbolicity(hy);
    return 2;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    // Parameter validation from the library side: still a usage error.
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
