// Timing harness comparing the serial reference paths against the
// OpenMP-parallel ones: training (Hogwild shards), evaluation fan-out, and
// the delta-hyperbolicity tuple scan.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>

#include "cxhyp/eval.hpp"
#include "cxhyp/graph.hpp"
#include "cxhyp/model.hpp"

using namespace cxhyp;

namespace {

double now_sec() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_call(F&& f) {
  double t0 = now_sec();
  f();
  return now_sec() - t0;
}

void report(const char* name, double serial, double parallel, int workers) {
  std::printf("%-24s serial %8.3fs   %d workers %8.3fs   speedup %.2fx\n",
              name, serial, workers, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CXHYP_WORKERS")) workers = std::atoi(env);
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--workers") workers = std::atoi(argv[i + 1]);
  if (workers < 1) workers = 1;

  Graph g = compressed_graph(400, 2, 7);
  std::printf("graph: %lld nodes, %lld edges, %d workers\n\n",
              static_cast<long long>(g.node_count()),
              static_cast<long long>(g.edge_count()), workers);

  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 30;
  cfg.seed = 7;

  TrainResult serial_model;
  double t_train_s = time_call([&] { serial_model = train(g, cfg); });
  double t_train_p =
      time_call([&] { (void)train_parallel(g, cfg, workers); });
  report("train", t_train_s, t_train_p, workers);

  RankingTask task;
  task.eval_graph = &g;
  std::vector<int32_t> ns{1, 3, 10};
  EvalReport rep_s, rep_p;
  double t_eval_s =
      time_call([&] { rep_s = evaluate(serial_model.table, task, ns, 1); });
  double t_eval_p = time_call(
      [&] { rep_p = evaluate(serial_model.table, task, ns, workers); });
  report("evaluate", t_eval_s, t_eval_p, workers);
  if (rep_s.map != rep_p.map)
    std::printf("  !! parallel evaluate diverged from serial\n");

  Graph small = compressed_graph(220, 2, 7);
  auto dist = bfs_all_pairs(small, workers);
  double delta_s = 0.0, delta_p = 0.0;
  double t_delta_s = time_call(
      [&] { delta_s = detail::delta_scan_serial(dist, small.node_count()); });
  double t_delta_p = time_call([&] {
    delta_p =
        detail::delta_scan_parallel(dist, small.node_count(), workers);
  });
  report("delta scan", t_delta_s, t_delta_p, workers);
  if (delta_s != delta_p)
    std::printf("  !! parallel delta scan diverged from serial\n");

  return 0;
}
