#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "grembed/graph.hpp"
#include "grembed/nce.hpp"

namespace grembed {

struct EvalPair {
  VertexRef u;
  VertexRef v;
  bool positive = false;

  friend bool operator==(const EvalPair&, const EvalPair&) = default;
};

struct EvalSplit {
  Graph train_graph; // original graph minus the held-out positives
  std::vector<EvalPair> pairs;
  double ratio = 0.9;
  std::uint64_t seed = 0;
};

// Holds out (1-ratio) of the edges uniformly as positives and samples one
// verified non-edge (on the full graph) per positive with matching endpoint
// types; being full-graph non-edges, negatives are disjoint from both the
// training edges and the positives.
EvalSplit split_edges(const Graph& g, double ratio, std::uint64_t seed,
                      std::uint32_t max_attempts = 1000);

// Split file mirrors the edge-list format with a POS|NEG column; endpoints
// are written as <vtype>:<dense_id>.
void save_split(const std::string& path, const EvalSplit& split);
std::vector<EvalPair> load_split(const std::string& path);

struct AccuracyReport {
  double pos_acc = 0;   // percent
  double neg_acc = 0;   // percent
  double total_acc = 0; // percent, always the mean of the two
  double threshold = 0.5;
  std::uint64_t step = 0;
};

// A pair is predicted an edge iff sigmoid(score) >= threshold; ties predict
// "edge", so all-zero embeddings classify every pair positive.
template <typename T>
AccuracyReport link_accuracy(std::span<const EmbeddingTable<T>> tables_by_type,
                             std::span<const EvalPair> pairs, Metric metric,
                             double threshold = 0.5);

// CSV series "step,pos_acc,neg_acc,total_acc,wall_ms" with a leading
// "# config: ..." comment. Fetch failures become flagged "# gap" comment lines
// so the numeric columns stay clean.
class ConvergenceLog {
 public:
  ConvergenceLog(const std::string& path, const std::string& config_comment);

  void add(const AccuracyReport& report, double wall_ms);
  void gap(std::uint64_t step, const std::string& reason);
  const std::vector<AccuracyReport>& rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::vector<AccuracyReport> rows_;
};

} // namespace grembed
