#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grembed/io_util.hpp"

// Framing shared by server, client, and protocol tests. All integers
// little-endian. Request frame on the socket:
//   [u32 frame_len] [u8 opcode] [u8 vtype] [u32 n_ids] [n_ids x u64 id]
//   [PUT only: u32 dim, n_ids*dim raw values]
// frame_len counts everything after itself. Response:
//   [u32 len] [u8 status] [payload]
namespace grembed::wire {

enum class Op : std::uint8_t { get = 1, put = 2, shutdown = 3, stats = 4 };

enum class Status : std::uint8_t {
  ok = 0,
  partial = 1,      // PUT applied except payload-listed rows: u32 n, n x u64 id
  malformed = 2,    // payload: error text
  out_of_range = 3, // payload: u64 first offending id
  dim_mismatch = 4, // payload: u32 server dim
  bad_vtype = 5,    // payload: u8 server vtype
  bad_opcode = 6,
};

// A frame larger than this is treated as a framing failure and the connection
// is dropped (there is no way to resynchronize).
constexpr std::uint32_t kMaxFrame = 256u << 20;

struct Request {
  Op op = Op::get;
  std::uint8_t vtype = 0;
  std::vector<std::uint64_t> ids;
  std::uint32_t dim = 0;          // PUT only
  const unsigned char* values = nullptr; // PUT only: ids.size()*dim raw values
  std::size_t value_bytes = 0;
};

// Body = everything after frame_len. value_size is the server's value width;
// throws on any structural violation.
Request parse_request(const void* body, std::size_t len, std::size_t value_size);

std::string encode_get(std::uint8_t vtype, std::span<const std::uint64_t> ids);
std::string encode_put(std::uint8_t vtype, std::span<const std::uint64_t> ids,
                       std::uint32_t dim, const void* values, std::size_t value_size);
std::string encode_shutdown();
std::string encode_stats();

std::string encode_response(Status status, const std::string& payload);

} // namespace grembed::wire
