#include <csignal>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "grembed/driver.hpp"

namespace {

std::vector<std::uint32_t> parse_counts(const std::string& csv) {
  std::vector<std::uint32_t> counts;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    std::string tok = csv.substr(pos, comma - pos);
    if (!tok.empty()) counts.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    pos = comma + 1;
  }
  return counts;
}

void print_accuracy(const grembed::AccuracyReport& a) {
  std::printf("pos_acc=%.2f neg_acc=%.2f total_acc=%.2f step=%llu\n", a.pos_acc, a.neg_acc,
              a.total_acc, static_cast<unsigned long long>(a.step));
}

} // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"grembed: graph embedding training on a local process cluster"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "execute the full training pipeline once");
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("overrides", overrides, "key=value settings; beat the config file");

  std::string workers_csv = "1,2,4";
  auto* sweep = app.add_subcommand("sweep", "one run per worker count, shared seed");
  sweep->add_option("--config", config_path, "key=value config file");
  sweep->add_option("--workers", workers_csv, "comma-separated worker counts");
  sweep->add_option("overrides", overrides, "key=value settings; beat the config file");

  std::string checkpoint_dir;
  std::string split_path;
  std::string metric = "dot";
  double threshold = 0.5;
  auto* eval = app.add_subcommand("eval", "re-score a saved checkpoint against a split");
  eval->add_option("--checkpoint", checkpoint_dir, "checkpoint directory")->required();
  eval->add_option("--split", split_path, "split file from a run")->required();
  eval->add_option("--metric", metric, "dot|cosine")->check(CLI::IsMember({"dot", "cosine"}));
  eval->add_option("--threshold", threshold, "sigmoid decision threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) {
      grembed::RunConfig cfg = grembed::make_config(config_path, overrides);
      grembed::RunReport rep = grembed::run_training(cfg);
      print_accuracy(rep.final_accuracy);
      std::printf("report: %s/report.json\n", rep.out_dir.c_str());
    } else if (app.got_subcommand(sweep)) {
      grembed::RunConfig cfg = grembed::make_config(config_path, overrides);
      auto counts = parse_counts(workers_csv);
      grembed::SweepReport rep = grembed::run_sweep(cfg, counts);
      int failures = 0;
      for (const auto& row : rep.rows) {
        if (!row.error.empty()) {
          std::printf("w%u failed: %s\n", row.workers, row.error.c_str());
          ++failures;
          continue;
        }
        std::printf("w%u total_acc=%.2f steps_to_threshold=%lld\n", row.workers,
                    row.total_acc, static_cast<long long>(row.steps_to_threshold));
      }
      std::printf("table: %s/sweep_table.tsv\n", cfg.out_dir.c_str());
      if (failures > 0) return 1;
    } else {
      auto m = metric == "cosine" ? grembed::Metric::cosine : grembed::Metric::dot;
      auto acc = grembed::eval_checkpoint_dir(checkpoint_dir, split_path, m, threshold);
      print_accuracy(acc);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "grembed: %s\n", e.what());
    return 1;
  }
  return 0;
}
