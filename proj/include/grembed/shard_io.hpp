#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grembed/walk.hpp"

namespace grembed {

// Shard container, magic "GWLK" version 1, little-endian:
//   magic[4] | version u16 | k u16 | row_count u64 | typed u8
//   then row_count rows of (2+k) refs, each ref = vtype u8 | id u64.
// Ref order per row: input, context, negatives[0..k).
struct ShardHeader {
  std::uint16_t k = 0;
  std::uint64_t rows = 0;
  bool typed = false;
};

void write_shard(const std::string& path, std::span<const TrainingRow> rows,
                 std::uint16_t k, bool typed);

std::vector<TrainingRow> read_shard(const std::string& path, ShardHeader* header = nullptr);

ShardHeader peek_shard(const std::string& path);

// Line-per-row text mirror for debugging: tab-separated refs as <vtype>:<id>.
void write_shard_tsv(const std::string& path, std::span<const TrainingRow> rows);

std::vector<TrainingRow> read_shard_tsv(const std::string& path);

} // namespace grembed
