#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "grembed/worker.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"embedding training worker: fetch, train, flush over one shard"};
  grembed::WorkerConfig cfg;
  std::string metric = "dot";
  std::string dtype = "f32";
  app.add_option("--shard", cfg.shard_path, "training shard (.gwlk)")->required();
  app.add_option("--routes", cfg.routes_path, "route table file")->required();
  app.add_option("--dim", cfg.dim, "embedding dimension")->required();
  app.add_option("--lr", cfg.train.learning_rate, "sgd learning rate");
  app.add_option("--batch-size", cfg.train.batch_size, "rows per sgd batch");
  app.add_option("--n-steps", cfg.train.n_steps, "batches per subset");
  app.add_option("--budget-bytes", cfg.budget_bytes, "local table byte cap per subset");
  app.add_option("--seed", cfg.seed, "worker seed");
  app.add_option("--metric", metric, "dot|cosine")->check(CLI::IsMember({"dot", "cosine"}));
  app.add_option("--dtype", dtype, "f32|f64")->check(CLI::IsMember({"f32", "f64"}));
  app.add_option("--epochs", cfg.epochs, "passes over the shard");
  app.add_option("--worker-id", cfg.worker_id, "id used in log messages");
  app.add_flag("--prefetch", cfg.prefetch, "overlap next subset's fetch with training");
  CLI11_PARSE(app, argc, argv);

  cfg.train.metric = metric == "cosine" ? grembed::Metric::cosine : grembed::Metric::dot;
  cfg.dtype = dtype == "f64" ? grembed::Dtype::f64 : grembed::Dtype::f32;

  try {
    auto progress = [](const grembed::SubsetReport& r) {
      nlohmann::json j{{"subset", r.subset}, {"mean_loss", r.mean_loss},
                       {"fetched", r.fetched}, {"flushed", r.flushed},
                       {"wall_ms", r.wall_ms}, {"steps", r.steps}};
      if (r.splits > 0) j["splits"] = r.splits;
      if (!r.error.empty()) j["error"] = r.error;
      // One JSON object per line, flushed so a supervisor can read it live.
      std::cout << j.dump() << std::endl;
    };
    grembed::run_worker(cfg, progress);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "worker %d: %s\n", cfg.worker_id, e.what());
    return 1;
  }
  return 0;
}
