#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grembed/embedding.hpp"
#include "grembed/graph.hpp"
#include "grembed/nce.hpp"
#include "grembed/walk.hpp"

namespace grembed {

// Full pipeline configuration. Every field maps to one key in the flat
// key=value config file; CLI overrides beat the file, which beats defaults.
struct RunConfig {
  std::string graph_path;
  EdgeSchema schema = EdgeSchema::untyped;
  bool undirected = true;

  WalkParams walk;           // walks_per_vertex, walk_length, context_window
  TrainConfig train;         // lr, batch_size, n_steps, metric, negatives
  NoiseDist noise = NoiseDist::uniform;
  std::uint32_t max_attempts = 100;

  std::uint32_t dim = 16;
  Dtype dtype = Dtype::f32;
  std::uint32_t workers = 1;
  std::uint32_t epochs = 1;
  std::uint64_t server_capacity = 1ull << 30;
  std::uint64_t budget_bytes = 2ull << 30;
  bool prefetch = false;

  double eval_ratio = 0.9;
  std::uint64_t eval_cadence = 0; // global steps between evals; 0 = final only
  double eval_threshold = 70.0;   // percent, for the steps-to-threshold table

  std::uint64_t seed = 42;
  std::string out_dir = "out";

  // Parses "key=value" and applies it; unknown key or bad value throws.
  void set(const std::string& key, const std::string& value);

  // One "key=value" line per field, the config echo embedded in reports.
  std::string echo() const;

  void validate() const;
};

RunConfig load_config(const std::string& path);

// overrides are "key=value" strings, applied after the file.
RunConfig make_config(const std::string& config_path,
                      const std::vector<std::string>& overrides);

} // namespace grembed
