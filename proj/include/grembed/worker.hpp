#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grembed/local_index.hpp"
#include "grembed/nce.hpp"

namespace grembed {

struct WorkerConfig {
  std::string shard_path;
  std::string routes_path;
  std::uint32_t dim = 16;
  TrainConfig train;
  Dtype dtype = Dtype::f32;
  // Cap on the local embedding-table bytes fetched per subset; an
  // over-budget subset is split in half recursively.
  std::uint64_t budget_bytes = 2ull << 30;
  std::uint32_t epochs = 1;
  std::uint64_t seed = 0;
  int worker_id = 0;
  int connect_attempts = 5;
  // Overlap the next subset's fetch with the current subset's training
  // (depth 1). Off by default: the sequential loop reads its own flushes.
  bool prefetch = false;
};

struct SubsetReport {
  std::uint64_t subset = 0;
  double mean_loss = 0;
  std::uint64_t fetched = 0; // unique rows requested from servers
  std::uint64_t flushed = 0; // unique rows written back
  double wall_ms = 0;
  std::uint32_t splits = 0;  // extra parts created by budget splitting
  std::uint32_t steps = 0;   // sgd batches run
  std::string error;         // nonempty when the subset was aborted
};

struct WorkerReport {
  std::uint64_t rows_seen = 0;
  std::uint64_t subsets = 0;
  std::uint64_t fetched = 0;
  std::uint64_t flushed = 0;
  std::uint64_t steps = 0;
  std::uint64_t splits = 0;
  std::uint64_t aborted_subsets = 0;
  double last_mean_loss = 0;
  double wall_ms = 0;
};

using SubsetProgressFn = std::function<void(const SubsetReport&)>;

// Per-type local tables for one subset; index = vertex type.
template <typename T>
struct LocalModel {
  std::vector<EmbeddingTable<T>> tables;
  std::vector<GradientSet<T>> grads;
};

class PoisonedBatchError : public std::runtime_error {
 public:
  PoisonedBatchError(std::uint32_t batch_index)
      : std::runtime_error("non-finite loss in batch " + std::to_string(batch_index)),
        batch_index(batch_index) {}

  std::uint32_t batch_index;
};

// Runs cfg.n_steps sequential minibatches over `rows`, cycling from the start
// when the slice is exhausted; applies one sgd_step per type per batch.
// Returns the mean per-example loss across all trained batches.
template <typename T>
double train_subset(LocalModel<T>& model, std::span<const LocalRow> rows,
                    const TrainConfig& cfg);

// The full worker loop over a shard: slice dataSize rows per subset, build
// the local index, fetch, train, flush, repeat for cfg.epochs passes.
WorkerReport run_worker(const WorkerConfig& cfg, const SubsetProgressFn& progress = {});

} // namespace grembed
