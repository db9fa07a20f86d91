#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grembed/embedding.hpp"

namespace grembed {

struct ServerConfig {
  std::uint8_t vtype = 0;
  std::string label = "v";
  std::uint64_t row_begin = 0;
  std::uint64_t row_end = 0;
  std::uint32_t dim = 0;
  Dtype dtype = Dtype::f32;
  std::uint64_t seed = 0;
};

struct ServerCounters {
  std::uint64_t gets = 0;
  std::uint64_t puts = 0;
  std::uint64_t stats = 0;
  std::uint64_t rows_read = 0;
  std::uint64_t rows_written = 0;
  std::uint64_t rows_rejected = 0;
  std::uint64_t errors = 0;
};

// One embedding-table slice behind a TCP endpoint. The event loop is a single
// thread multiplexing all connections, so requests are applied in a total
// order and every row read or write is atomic by construction; concurrent
// puts to one row resolve to whichever request the loop handled last.
class PsServer {
 public:
  explicit PsServer(const ServerConfig& cfg);
  ~PsServer();

  PsServer(const PsServer&) = delete;
  PsServer& operator=(const PsServer&) = delete;

  // port 0 binds an ephemeral port; returns the bound port.
  std::uint16_t listen(std::uint16_t port);

  // Serves until a SHUTDOWN frame arrives or request_stop() is called.
  void run();

  // Safe from another thread; takes effect within one poll interval.
  void request_stop() { stop_.store(true); }

  const ServerConfig& config() const { return cfg_; }
  const ServerCounters& counters() const { return counters_; }

  // Direct slice access for in-process tests; not used while run() is active.
  template <typename T>
  const EmbeddingTable<T>& table() const;

 private:
  struct Conn;

  void handle_frame(Conn& c, const char* body, std::size_t len);
  std::string serve_get(const std::vector<std::uint64_t>& ids);
  std::string serve_put(const std::vector<std::uint64_t>& ids, const unsigned char* values);
  std::string stats_text() const;

  ServerConfig cfg_;
  ServerCounters counters_;
  EmbeddingTable<float> table_f32_;
  EmbeddingTable<double> table_f64_;
  int listen_fd_ = -1;
  std::atomic<bool> stop_{false};
  bool shutdown_seen_ = false;
};

} // namespace grembed
