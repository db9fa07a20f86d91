#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "grembed/embedding.hpp"
#include "grembed/nce.hpp"
#include "grembed/walk.hpp"

namespace grembed::test {

template <typename T>
struct OracleRun {
  std::vector<EmbeddingTable<T>> tables; // final full table per vertex type
  std::vector<double> subset_mean_losses;
  std::uint64_t steps = 0;
};

// Called after each subset's scatter with the cumulative step count.
template <typename T>
using OracleHook = std::function<void(std::uint64_t steps, const std::vector<EmbeddingTable<T>>&)>;

// The worker's fetch/train/flush loop without the network: gather each
// subset's unique rows into a local table, run train_subset, scatter the rows
// back as overwrites. It shares the arithmetic path with the real worker, so
// identical seeds and rows give bit-identical final tables.
template <typename T>
OracleRun<T> run_oracle(std::span<const std::uint64_t> type_counts,
                        std::span<const TrainingRow> rows, const TrainConfig& cfg,
                        std::uint32_t dim, std::span<const std::uint64_t> type_seeds,
                        std::uint32_t epochs, const OracleHook<T>& on_subset = {});

} // namespace grembed::test
