#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace grembed {

enum class PartitionStrategy { row_wise, column_wise };

// Row-wise: rows [begin, end) of one vertex type live on `server`.
// Column-wise: dimensions [begin, end) of that type's table live on `server`.
struct RangeAssignment {
  std::uint32_t server = 0;
  std::uint8_t vtype = 0;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  friend bool operator==(const RangeAssignment&, const RangeAssignment&) = default;
};

struct PartitionPlan {
  PartitionStrategy strategy = PartitionStrategy::row_wise;
  std::vector<RangeAssignment> assignments;
  std::vector<std::uint64_t> server_bytes; // indexed by server id
  std::uint64_t server_capacity = 0;

  std::uint32_t server_count() const { return static_cast<std::uint32_t>(server_bytes.size()); }
};

class InfeasiblePlanError : public std::runtime_error {
 public:
  InfeasiblePlanError(const std::string& what, std::uint64_t violating_bytes)
      : std::runtime_error(what), violating_bytes(violating_bytes) {}

  std::uint64_t violating_bytes;
};

struct PlanRequest {
  std::vector<std::uint64_t> counts; // rows per vertex type
  std::uint32_t dim = 0;
  std::uint32_t bytes_per_value = 4;
  std::uint64_t server_capacity = 0; // bytes, must be positive
  PartitionStrategy strategy = PartitionStrategy::row_wise;
  // Optional per-vertex request frequencies (same shape as counts). When
  // present, row-wise planning packs contiguous chunks first-fit-decreasing by
  // frequency mass instead of splitting uniformly.
  std::vector<std::vector<std::uint64_t>> frequencies;
};

// Servers hold one vertex type each (row-wise) or one type's column group
// (column-wise); a server's assigned bytes never exceed capacity. Throws
// InfeasiblePlanError when a single row (row-wise) or a single column
// (column-wise) is larger than the capacity.
PartitionPlan plan_partitions(const PlanRequest& req);

} // namespace grembed
