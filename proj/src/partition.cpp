#include "grembed/partition.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace grembed {

namespace {

// Chunks per server under frequency-aware packing. Finer chunks pack closer to
// the optimum at the cost of a longer assignment list.
constexpr std::uint64_t kChunksPerServer = 8;

void plan_rows_uniform(const PlanRequest& req, PartitionPlan& plan) {
  const std::uint64_t row_bytes =
      static_cast<std::uint64_t>(req.dim) * req.bytes_per_value;
  const std::uint64_t rows_per_server = req.server_capacity / row_bytes; // capacity fit
  for (std::uint8_t t = 0; t < req.counts.size(); ++t) {
    std::uint64_t count = req.counts[t];
    if (count == 0) continue;
    if (rows_per_server == 0)
      throw InfeasiblePlanError("partition: one row of " + std::to_string(row_bytes) +
                                    " bytes exceeds server capacity " +
                                    std::to_string(req.server_capacity),
                                row_bytes);
    std::uint64_t n_servers = (count + rows_per_server - 1) / rows_per_server;
    // Balanced contiguous ranges; earlier servers take the remainder.
    std::uint64_t base = count / n_servers;
    std::uint64_t extra = count % n_servers;
    std::uint64_t at = 0;
    for (std::uint64_t s = 0; s < n_servers; ++s) {
      std::uint64_t len = base + (s < extra ? 1 : 0);
      std::uint32_t server = static_cast<std::uint32_t>(plan.server_bytes.size());
      plan.assignments.push_back({server, t, at, at + len});
      plan.server_bytes.push_back(len * row_bytes);
      at += len;
    }
  }
}

void plan_rows_ffd(const PlanRequest& req, PartitionPlan& plan) {
  const std::uint64_t row_bytes =
      static_cast<std::uint64_t>(req.dim) * req.bytes_per_value;
  const std::uint64_t rows_per_server = req.server_capacity / row_bytes;

  struct Chunk {
    std::uint8_t vtype;
    std::uint64_t begin, end;
    std::uint64_t mass;
  };
  std::vector<Chunk> chunks;
  for (std::uint8_t t = 0; t < req.counts.size(); ++t) {
    std::uint64_t count = req.counts[t];
    if (count == 0) continue;
    if (rows_per_server == 0)
      throw InfeasiblePlanError("partition: one row of " + std::to_string(row_bytes) +
                                    " bytes exceeds server capacity " +
                                    std::to_string(req.server_capacity),
                                row_bytes);
    const auto& freq = req.frequencies[t];
    std::uint64_t chunk_rows = std::max<std::uint64_t>(1, rows_per_server / kChunksPerServer);
    for (std::uint64_t at = 0; at < count; at += chunk_rows) {
      std::uint64_t end = std::min(count, at + chunk_rows);
      std::uint64_t mass = std::accumulate(freq.begin() + at, freq.begin() + end,
                                           std::uint64_t{0});
      chunks.push_back({t, at, end, mass});
    }
  }
  std::stable_sort(chunks.begin(), chunks.end(),
                   [](const Chunk& a, const Chunk& b) { return a.mass > b.mass; });

  // First fit decreasing over byte capacity; servers are opened on demand and
  // hold a single vertex type.
  std::vector<std::uint8_t> server_type;
  for (const auto& c : chunks) {
    std::uint64_t bytes = (c.end - c.begin) * row_bytes;
    std::uint32_t s = 0;
    for (; s < plan.server_bytes.size(); ++s)
      if (server_type[s] == c.vtype && plan.server_bytes[s] + bytes <= req.server_capacity)
        break;
    if (s == plan.server_bytes.size()) {
      plan.server_bytes.push_back(0);
      server_type.push_back(c.vtype);
    }
    plan.assignments.push_back({s, c.vtype, c.begin, c.end});
    plan.server_bytes[s] += bytes;
  }
  // Keep ranges sorted for readers; server ids stay as packed.
  std::sort(plan.assignments.begin(), plan.assignments.end(),
            [](const RangeAssignment& a, const RangeAssignment& b) {
              return std::tie(a.vtype, a.begin) < std::tie(b.vtype, b.begin);
            });
}

void plan_columns(const PlanRequest& req, PartitionPlan& plan) {
  for (std::uint8_t t = 0; t < req.counts.size(); ++t) {
    std::uint64_t count = req.counts[t];
    if (count == 0) continue;
    std::uint64_t col_bytes = count * req.bytes_per_value;
    if (col_bytes > req.server_capacity)
      throw InfeasiblePlanError("partition: one column of " + std::to_string(col_bytes) +
                                    " bytes exceeds server capacity " +
                                    std::to_string(req.server_capacity),
                                col_bytes);
    std::uint64_t cols_per_server = req.server_capacity / col_bytes;
    std::uint64_t n_servers = (req.dim + cols_per_server - 1) / cols_per_server;
    std::uint64_t base = req.dim / n_servers;
    std::uint64_t extra = req.dim % n_servers;
    std::uint64_t at = 0;
    for (std::uint64_t s = 0; s < n_servers; ++s) {
      std::uint64_t len = base + (s < extra ? 1 : 0);
      std::uint32_t server = static_cast<std::uint32_t>(plan.server_bytes.size());
      plan.assignments.push_back({server, t, at, at + len});
      plan.server_bytes.push_back(len * col_bytes);
      at += len;
    }
  }
}

} // namespace

PartitionPlan plan_partitions(const PlanRequest& req) {
  if (req.server_capacity == 0)
    throw std::invalid_argument("partition: server capacity must be positive");
  if (req.dim == 0) throw std::invalid_argument("partition: dim must be positive");
  if (req.bytes_per_value != 4 && req.bytes_per_value != 8)
    throw std::invalid_argument("partition: bytes_per_value must be 4 or 8");
  if (!req.frequencies.empty() && req.frequencies.size() != req.counts.size())
    throw std::invalid_argument("partition: frequencies shape does not match counts");
  if (!req.frequencies.empty())
    for (std::size_t t = 0; t < req.counts.size(); ++t)
      if (req.frequencies[t].size() != req.counts[t])
        throw std::invalid_argument("partition: frequencies shape does not match counts");
  if (req.counts.size() > 256) throw std::invalid_argument("partition: more than 256 types");

  PartitionPlan plan;
  plan.strategy = req.strategy;
  plan.server_capacity = req.server_capacity;
  if (req.strategy == PartitionStrategy::column_wise)
    plan_columns(req, plan);
  else if (req.frequencies.empty())
    plan_rows_uniform(req, plan);
  else
    plan_rows_ffd(req, plan);
  return plan;
}

} // namespace grembed
