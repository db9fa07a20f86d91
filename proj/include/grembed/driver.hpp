#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grembed/eval.hpp"
#include "grembed/run_config.hpp"

namespace grembed {

// Wraps a failure with the pipeline stage it happened in.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage(stage) {}

  std::string stage;
};

struct WorkerSummary {
  int worker_id = 0;
  int exit_code = 0;
  std::uint64_t subsets = 0;
  std::uint64_t steps = 0;
  std::uint64_t aborted_subsets = 0;
  double last_mean_loss = 0;
};

struct RunReport {
  std::uint32_t workers = 0;
  std::uint64_t vertices = 0;
  std::uint64_t edges = 0;      // full graph
  std::uint64_t train_edges = 0;
  std::uint64_t held_positives = 0;
  std::uint64_t walks = 0;
  std::uint64_t pairs = 0;
  std::uint64_t training_rows = 0;
  std::uint32_t server_count = 0;
  std::vector<WorkerSummary> worker_summaries;
  // A global step is one completed batch summed over workers; the report
  // carries this interpretation so step counts are comparable across runs.
  std::uint64_t global_steps = 0;
  AccuracyReport final_accuracy;
  std::int64_t steps_to_threshold = -1; // -1: threshold never reached
  double wall_ms = 0;
  std::string config_echo;
  std::string out_dir;
};

// Runs the whole pipeline under cfg.out_dir: split, walk, shard, plan, spawn
// servers and workers as local processes, track convergence, checkpoint.
// Artifacts: report.json, convergence_w<k>.csv, split.tsv, routes.txt,
// shard_<i>.gwlk, checkpoint/<label>.gemb (+ types.tsv manifest).
RunReport run_training(const RunConfig& cfg);

struct SweepRow {
  std::uint32_t workers = 0;
  double pos_acc = 0;
  double neg_acc = 0;
  double total_acc = 0;
  std::int64_t steps_to_threshold = -1;
  std::string error; // nonempty: this run failed and the row is a placeholder
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<RunReport> runs; // parallel to rows; default-constructed on failure
};

// One run per worker count under cfg.out_dir/w<count>, shared seed and split;
// writes cfg.out_dir/sweep_table.tsv and copies each convergence CSV up.
SweepReport run_sweep(const RunConfig& cfg, const std::vector<std::uint32_t>& worker_counts);

// Re-scores a saved checkpoint directory against a saved split file.
AccuracyReport eval_checkpoint_dir(const std::string& checkpoint_dir,
                                   const std::string& split_path, Metric metric,
                                   double threshold = 0.5);

} // namespace grembed
