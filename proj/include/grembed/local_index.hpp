#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "grembed/walk.hpp"

namespace grembed {

// Per-type bijection between global row ids and dense worker-local indices,
// assigned in first-occurrence order scanning each row as input, context,
// then negatives.
class LocalIndexMap {
 public:
  static LocalIndexMap build(std::span<const TrainingRow> rows);

  std::uint32_t local(VertexRef v) const;
  std::span<const std::uint64_t> globals(std::uint8_t vtype) const;
  std::uint32_t unique_count(std::uint8_t vtype) const;
  std::uint8_t type_count() const { return static_cast<std::uint8_t>(reverse_.size()); }
  std::uint64_t total_unique() const;

 private:
  void intern(VertexRef v);

  std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> forward_;
  std::vector<std::vector<std::uint64_t>> reverse_;
};

// Row with table-local indices; negatives share the context's type.
struct LocalRow {
  std::uint8_t input_type = 0;
  std::uint8_t context_type = 0;
  std::uint32_t input = 0;
  std::uint32_t context = 0;
  std::vector<std::uint32_t> negatives;
};

std::vector<LocalRow> relabel(std::span<const TrainingRow> rows, const LocalIndexMap& map);

// Inverse of relabel; rebuilds the original global rows.
std::vector<TrainingRow> unrelabel(std::span<const LocalRow> rows, const LocalIndexMap& map);

} // namespace grembed
