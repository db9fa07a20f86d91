#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "grembed/embedding.hpp"
#include "grembed/partition.hpp"
#include "grembed/vertex.hpp"

namespace grembed {

struct PutAck {
  std::vector<std::uint64_t> rejected; // row ids refused by the server
};

// Blocking framed request/response over one TCP connection. Not thread-safe;
// give each thread its own client. Pipelined puts (put_rows_nowait + drain)
// let a writer keep many requests in flight on one connection.
class PsClient {
 public:
  // Retries connect with doubling delay (50 ms base, 1 s cap).
  PsClient(const std::string& host, std::uint16_t port, int connect_attempts = 5);
  ~PsClient();

  PsClient(const PsClient&) = delete;
  PsClient& operator=(const PsClient&) = delete;

  template <typename T>
  void get_rows(std::uint8_t vtype, std::span<const std::uint64_t> ids, std::uint32_t dim,
                T* out);

  template <typename T>
  PutAck put_rows(std::uint8_t vtype, std::span<const std::uint64_t> ids, std::uint32_t dim,
                  const T* values);

  template <typename T>
  void put_rows_nowait(std::uint8_t vtype, std::span<const std::uint64_t> ids,
                       std::uint32_t dim, const T* values);

  // Collects acks for every outstanding nowait put.
  PutAck drain();

  std::map<std::string, std::uint64_t> stats();
  void shutdown_server();

 private:
  std::string request(const std::string& frame);
  std::string read_response();
  PutAck parse_put_ack(const std::string& resp);

  int fd_ = -1;
  int outstanding_ = 0;
};

struct RouteEntry {
  std::uint8_t vtype = 0;
  std::string label;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  std::string host;
  std::uint16_t port = 0;
};

// Maps every (vtype, id) to the server holding that row. Text file format,
// one entry per line: <vtype> <label> <begin> <end> <host> <port>.
class RouteTable {
 public:
  RouteTable() = default;
  explicit RouteTable(std::vector<RouteEntry> entries);

  static RouteTable load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<RouteEntry>& entries() const { return entries_; }
  std::size_t server_for(VertexRef v) const; // index into entries()
  std::uint64_t row_count(std::uint8_t vtype) const;
  std::string label(std::uint8_t vtype) const;
  std::uint8_t type_count() const;

 private:
  std::vector<RouteEntry> entries_; // sorted by (vtype, begin)
};

// Fans requests out across the route table's servers, preserving the caller's
// id order in the assembled result.
class RoutedClient {
 public:
  explicit RoutedClient(const RouteTable& routes, int connect_attempts = 5);

  template <typename T>
  void get_rows(std::uint8_t vtype, std::span<const std::uint64_t> ids, std::uint32_t dim,
                T* out);

  template <typename T>
  PutAck put_rows(std::uint8_t vtype, std::span<const std::uint64_t> ids, std::uint32_t dim,
                  const T* values);

  // Whole-table fetch in row order, e.g. for evaluation and checkpoints.
  template <typename T>
  EmbeddingTable<T> fetch_type(std::uint8_t vtype, std::uint32_t dim);

  std::vector<std::map<std::string, std::uint64_t>> stats_all();
  void shutdown_all();

 private:
  const RouteTable& routes_;
  std::vector<std::unique_ptr<PsClient>> clients_; // parallel to routes_.entries()
};

} // namespace grembed
