#include <algorithm>
#include <map>
#include <numeric>

#include "doctest.h"

#include "grembed/partition.hpp"
#include "grembed/rng.hpp"

using namespace grembed;

namespace {

// Tiling, capacity, byte accounting, and one-type-per-server (row-wise).
void check_plan(const PlanRequest& req, const PartitionPlan& plan) {
  std::map<std::uint32_t, std::uint64_t> bytes_by_server;
  std::map<std::uint32_t, std::uint8_t> type_by_server;
  std::map<std::uint8_t, std::vector<std::pair<std::uint64_t, std::uint64_t>>> ranges;
  for (const auto& a : plan.assignments) {
    std::uint64_t unit = plan.strategy == PartitionStrategy::row_wise
                             ? std::uint64_t(req.dim) * req.bytes_per_value
                             : req.counts[a.vtype] * req.bytes_per_value;
    bytes_by_server[a.server] += (a.end - a.begin) * unit;
    if (plan.strategy == PartitionStrategy::row_wise) {
      auto [it, fresh] = type_by_server.emplace(a.server, a.vtype);
      if (!fresh) CHECK(it->second == a.vtype);
    }
    ranges[a.vtype].push_back({a.begin, a.end});
  }
  REQUIRE(bytes_by_server.size() == plan.server_count());
  for (std::uint32_t s = 0; s < plan.server_count(); ++s) {
    CHECK(plan.server_bytes[s] == bytes_by_server[s]);
    CHECK(plan.server_bytes[s] <= plan.server_capacity);
  }
  for (std::uint8_t t = 0; t < req.counts.size(); ++t) {
    std::uint64_t extent = plan.strategy == PartitionStrategy::row_wise
                               ? req.counts[t]
                               : (req.counts[t] ? req.dim : 0);
    auto it = ranges.find(t);
    if (extent == 0) {
      CHECK(it == ranges.end());
      continue;
    }
    REQUIRE(it != ranges.end());
    auto& r = it->second;
    std::sort(r.begin(), r.end());
    std::uint64_t at = 0;
    for (auto [b, e] : r) {
      CHECK(b == at);
      CHECK(e > b);
      at = e;
    }
    CHECK(at == extent);
  }
}

} // namespace

TEST_CASE("column-wise capacity math on billion-row tables is exact") {
  PlanRequest req;
  req.dim = 300;
  req.bytes_per_value = 8;
  req.server_capacity = 256'000'000'000; // 256 GB
  req.strategy = PartitionStrategy::column_wise;

  req.counts = {30'000'000'000}; // one column = 240 GB, fits
  auto plan = plan_partitions(req);
  CHECK(plan.server_count() == 300); // exactly one column per server
  for (auto b : plan.server_bytes) CHECK(b == 240'000'000'000);
  check_plan(req, plan);

  req.counts = {33'000'000'000}; // one column = 264 GB, cannot fit anywhere
  CHECK_THROWS_AS(plan_partitions(req), InfeasiblePlanError);
  try {
    plan_partitions(req);
  } catch (const InfeasiblePlanError& e) {
    CHECK(e.violating_bytes == 264'000'000'000);
  }
}

TEST_CASE("row-wise split of 30e9 vertices at dim 300 takes 282 servers") {
  PlanRequest req;
  req.counts = {30'000'000'000};
  req.dim = 300;
  req.bytes_per_value = 8;
  req.server_capacity = 256'000'000'000;
  auto plan = plan_partitions(req);
  CHECK(plan.server_count() == 282);
  check_plan(req, plan);
}

TEST_CASE("row-wise uniform split balances contiguous ranges") {
  PlanRequest req;
  req.counts = {10, 0, 7};
  req.dim = 2;
  req.bytes_per_value = 4;
  req.server_capacity = 32; // 4 rows of 8 bytes per server
  auto plan = plan_partitions(req);
  // Type 0: ceil(10/4) = 3 servers, 4+3+3; type 2: 2 servers, 4+3.
  std::vector<RangeAssignment> expect = {
      {0, 0, 0, 4}, {1, 0, 4, 7}, {2, 0, 7, 10}, {3, 2, 0, 4}, {4, 2, 4, 7}};
  CHECK(plan.assignments == expect);
  CHECK(plan.server_bytes == std::vector<std::uint64_t>{32, 24, 24, 32, 24});
  check_plan(req, plan);
}

TEST_CASE("column-wise groups whole columns") {
  PlanRequest req;
  req.counts = {6};
  req.dim = 4;
  req.bytes_per_value = 4;
  req.server_capacity = 50; // column = 24 bytes, two fit
  req.strategy = PartitionStrategy::column_wise;
  auto plan = plan_partitions(req);
  std::vector<RangeAssignment> expect = {{0, 0, 0, 2}, {1, 0, 2, 4}};
  CHECK(plan.assignments == expect);
  CHECK(plan.server_bytes == std::vector<std::uint64_t>{48, 48});
  check_plan(req, plan);
}

TEST_CASE("one oversized row or column is rejected with its byte size") {
  PlanRequest req;
  req.counts = {100};
  req.dim = 100;
  req.bytes_per_value = 8;
  req.server_capacity = 700; // row = 800 bytes
  try {
    plan_partitions(req);
    FAIL("expected InfeasiblePlanError");
  } catch (const InfeasiblePlanError& e) {
    CHECK(e.violating_bytes == 800);
    CHECK(std::string(e.what()).find("800") != std::string::npos);
  }
  req.strategy = PartitionStrategy::column_wise;
  try {
    plan_partitions(req); // column = 100 * 8 = 800 bytes
    FAIL("expected InfeasiblePlanError");
  } catch (const InfeasiblePlanError& e) {
    CHECK(e.violating_bytes == 800);
  }
}

TEST_CASE("random plans keep every server inside capacity and tile every type") {
  auto rng = make_engine(404);
  for (int trial = 0; trial < 100; ++trial) {
    PlanRequest req;
    std::size_t n_types = 1 + bounded(rng, 3);
    for (std::size_t t = 0; t < n_types; ++t) req.counts.push_back(1 + bounded(rng, 5000));
    req.dim = 1 + static_cast<std::uint32_t>(bounded(rng, 64));
    req.bytes_per_value = bounded(rng, 2) ? 8 : 4;
    req.strategy = bounded(rng, 2) ? PartitionStrategy::column_wise
                                   : PartitionStrategy::row_wise;
    // Capacity at least one row / one column so the plan is feasible.
    std::uint64_t unit = req.strategy == PartitionStrategy::row_wise
                             ? std::uint64_t(req.dim) * req.bytes_per_value
                             : *std::max_element(req.counts.begin(), req.counts.end()) *
                                   req.bytes_per_value;
    req.server_capacity = unit * (1 + bounded(rng, 20));
    auto plan = plan_partitions(req);
    check_plan(req, plan);
    std::uint64_t total = std::accumulate(plan.server_bytes.begin(), plan.server_bytes.end(),
                                          std::uint64_t{0});
    std::uint64_t expect = 0;
    for (auto c : req.counts) expect += c * req.dim * req.bytes_per_value;
    CHECK(total == expect);
  }
}

TEST_CASE("frequency-aware packing chunks rows and keeps servers inside capacity") {
  PlanRequest req;
  req.counts = {10};
  req.dim = 1;
  req.bytes_per_value = 4;
  req.server_capacity = 16; // 4 rows per server, single-row chunks
  req.frequencies = {{0, 0, 0, 0, 0, 9, 9, 0, 0, 0}};
  auto plan = plan_partitions(req);
  check_plan(req, plan);
  CHECK(plan.server_count() == 3);
  // The two hot rows sort first and land on the first opened server.
  std::map<std::uint64_t, std::uint32_t> server_of;
  for (const auto& a : plan.assignments)
    for (std::uint64_t r = a.begin; r < a.end; ++r) server_of[r] = a.server;
  CHECK(server_of[5] == 0);
  CHECK(server_of[6] == 0);

  // Property sweep with random frequencies.
  auto rng = make_engine(405);
  for (int trial = 0; trial < 30; ++trial) {
    PlanRequest r2;
    std::size_t n_types = 1 + bounded(rng, 2);
    for (std::size_t t = 0; t < n_types; ++t) {
      r2.counts.push_back(1 + bounded(rng, 800));
      std::vector<std::uint64_t> f(r2.counts.back());
      for (auto& x : f) x = bounded(rng, 1000);
      r2.frequencies.push_back(std::move(f));
    }
    r2.dim = 1 + static_cast<std::uint32_t>(bounded(rng, 16));
    r2.bytes_per_value = 4;
    r2.server_capacity = std::uint64_t(r2.dim) * 4 * (1 + bounded(rng, 50));
    auto p = plan_partitions(r2);
    check_plan(r2, p);
  }
}

TEST_CASE("invalid requests are rejected up front") {
  PlanRequest req;
  req.counts = {10};
  req.dim = 4;
  req.server_capacity = 0;
  CHECK_THROWS_AS(plan_partitions(req), std::invalid_argument);
  req.server_capacity = 1024;
  req.dim = 0;
  CHECK_THROWS_AS(plan_partitions(req), std::invalid_argument);
  req.dim = 4;
  req.bytes_per_value = 3;
  CHECK_THROWS_AS(plan_partitions(req), std::invalid_argument);
  req.bytes_per_value = 4;
  req.frequencies = {{1, 2}}; // wrong inner shape
  CHECK_THROWS_AS(plan_partitions(req), std::invalid_argument);
  req.frequencies = {{1}, {2}}; // wrong outer shape
  CHECK_THROWS_AS(plan_partitions(req), std::invalid_argument);
  req.frequencies.clear();
  req.counts.assign(257, 1);
  CHECK_THROWS_AS(plan_partitions(req), std::invalid_argument);
}
