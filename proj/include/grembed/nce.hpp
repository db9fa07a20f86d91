#pragma once

#include <cstdint>
#include <vector>

#include "grembed/embedding.hpp"

namespace grembed {

enum class Metric { dot, cosine };

struct TrainConfig {
  double learning_rate = 0.05;
  std::uint32_t batch_size = 64;
  std::uint32_t n_steps = 4;
  Metric metric = Metric::dot;
  std::uint32_t negatives = 5; // k noise rows per example

  // Rows consumed per subset slice of the training shard.
  std::uint64_t data_size() const {
    return static_cast<std::uint64_t>(batch_size) * n_steps;
  }
};

// Pairwise score s(u, v). Cosine of a zero-norm vector is defined as 0 (and
// contributes zero gradient), so untrained all-zero rows behave as ties.
template <typename T>
double score(const T* u, const T* v, std::uint32_t dim, Metric metric);

// L = -log sigmoid(s(x,y)) - sum_i log sigmoid(-s(x,n_i)); sigmoid arguments
// are clamped to [-30, 30] before the log.
template <typename T>
double nce_loss(const T* x, const T* y, const T* const* negs, std::size_t k,
                std::uint32_t dim, Metric metric);

// Accumulating form: adds dL/dx into gx, dL/dy into gy, dL/dn_i into gnegs[i],
// returns the row loss. Accumulation order is fixed (positive term, then
// negatives in order), so repeated runs are bit-identical. Output pointers may
// alias each other when a row plays several roles.
template <typename T>
double nce_row_grad(const T* x, const T* y, const T* const* negs, std::size_t k,
                    std::uint32_t dim, Metric metric, T* gx, T* gy, T* const* gnegs);

// Standalone gradients for one example, starting from zero buffers.
template <typename T>
struct PairGradients {
  std::vector<T> input;
  std::vector<T> context;
  std::vector<std::vector<T>> negatives;
  double loss = 0;
};

template <typename T>
PairGradients<T> nce_gradients(const T* x, const T* y, const T* const* negs, std::size_t k,
                               std::uint32_t dim, Metric metric);

// Dense per-row gradient buffer over a local table. Rows touched by
// accumulation are flagged; clear() rezeroes only those.
template <typename T>
class GradientSet {
 public:
  void reset(std::uint64_t rows, std::uint32_t dim) {
    dim_ = dim;
    values_.assign(rows * dim, T(0));
    touched_.assign(rows, 0);
  }

  std::uint32_t dim() const { return dim_; }
  std::uint64_t rows() const { return touched_.size(); }
  bool touched(std::uint64_t r) const { return touched_[r] != 0; }

  T* row(std::uint64_t r) {
    touched_[r] = 1;
    return values_.data() + r * dim_;
  }
  const T* row_data(std::uint64_t r) const { return values_.data() + r * dim_; }

  void clear() {
    for (std::uint64_t r = 0; r < touched_.size(); ++r)
      if (touched_[r]) {
        T* p = values_.data() + r * dim_;
        for (std::uint32_t j = 0; j < dim_; ++j) p[j] = T(0);
        touched_[r] = 0;
      }
  }

 private:
  std::uint32_t dim_ = 0;
  std::vector<T> values_;
  std::vector<std::uint8_t> touched_;
};

struct SgdStats {
  std::uint64_t updated = 0;
  std::uint64_t skipped = 0; // rows with a non-finite gradient, left unchanged
};

// row -= lr * grad for every touched row with a finite gradient.
template <typename T>
SgdStats sgd_step(EmbeddingTable<T>& table, const GradientSet<T>& grads, T lr);

} // namespace grembed
