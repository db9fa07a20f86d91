#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "grembed/graph.hpp"
#include "grembed/vertex.hpp"

namespace grembed {

// One skip-gram example: (input, context) plus k noise vertices drawn from the
// context vertex's type.
struct TrainingRow {
  VertexRef input;
  VertexRef context;
  std::vector<VertexRef> negatives;

  friend bool operator==(const TrainingRow&, const TrainingRow&) = default;
};

struct WalkParams {
  std::uint32_t walks_per_vertex = 10;
  std::uint32_t walk_length = 2;   // vertices per walk
  std::uint32_t context_window = 2; // pair (w[i], w[i+d]) emitted for d < window
  std::uint64_t seed = 0;
};

struct WalkStats {
  std::uint64_t walks = 0;
  std::uint64_t truncated = 0; // stopped at a vertex with no out-neighbors
  std::uint64_t pairs = 0;
};

// w * sum_{j=2}^{c} (l - j + 1), clamped at zero per term. Exact for graphs
// with no dead ends; truncated walks emit fewer pairs.
std::uint64_t expected_pair_count(std::uint64_t walks_per_vertex_total,
                                  std::uint64_t walk_length,
                                  std::uint64_t context_window);

// Uniform random walk of up to `length` vertices starting at `start`; stops
// early at a vertex with no out-neighbors.
std::vector<VertexRef> random_walk(const Graph& g, VertexRef start,
                                   std::uint32_t length, std::mt19937_64& rng);

// Walks every vertex of every type walks_per_vertex times and emits ordered
// pairs: for each walk position i ascending, (w[i], w[i+d]) for d = 1 ..
// window-1. Each walk's engine is seeded from (seed, vertex, walk index), so
// output does not depend on traversal chunking.
std::vector<std::pair<VertexRef, VertexRef>> generate_pairs(const Graph& g,
                                                            const WalkParams& p,
                                                            WalkStats* stats = nullptr);

enum class NoiseDist {
  uniform,   // uniform over the context type's vertices
  unigram75, // proportional to context-corpus frequency^0.75
};

struct NegativeParams {
  std::uint32_t k = 5;
  NoiseDist dist = NoiseDist::uniform;
  std::uint32_t max_attempts = 100;
  std::uint64_t seed = 0;
};

// Draws k noise vertices per pair from the context's type, rejecting a
// candidate that equals the input or is a stored neighbor of the input.
// Throws after max_attempts consecutive rejections for one slot.
std::vector<TrainingRow> attach_negatives(const Graph& g,
                                          std::span<const std::pair<VertexRef, VertexRef>> pairs,
                                          const NegativeParams& p);

// Contiguous balanced slices: sizes differ by at most one, earlier shards take
// the remainder, concatenation in shard order restores `rows`.
std::vector<std::span<const TrainingRow>> shard_rows(std::span<const TrainingRow> rows,
                                                     std::uint32_t worker_count);

} // namespace grembed
