#include "grembed/ps_server.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "grembed/wire.hpp"

namespace grembed {

namespace {

void set_nonblocking(int fd) {
  // All sockets in the loop are nonblocking so one slow peer cannot stall the
  // rest.
  int flags = fcntl(fd, F_GETFL, 0);
  if (flags < 0 || fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0)
    throw std::runtime_error("fcntl O_NONBLOCK failed");
}

} // namespace

struct PsServer::Conn {
  int fd = -1;
  std::string in;
  std::string out;
  std::size_t out_at = 0;
  bool closing = false; // close once the write buffer drains
};

PsServer::PsServer(const ServerConfig& cfg) : cfg_(cfg) {
  if (cfg.row_end < cfg.row_begin) throw std::invalid_argument("server: bad row range");
  if (cfg.dim == 0) throw std::invalid_argument("server: dim must be positive");
  if (cfg.dtype == Dtype::f32)
    table_f32_ = init_embedding_rows<float>(cfg.row_begin, cfg.row_end, cfg.dim, cfg.seed);
  else
    table_f64_ = init_embedding_rows<double>(cfg.row_begin, cfg.row_end, cfg.dim, cfg.seed);
}

PsServer::~PsServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

template <>
const EmbeddingTable<float>& PsServer::table<float>() const {
  return table_f32_;
}

template <>
const EmbeddingTable<double>& PsServer::table<double>() const {
  return table_f64_;
}

std::uint16_t PsServer::listen(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0)
    throw std::runtime_error("bind to port " + std::to_string(port) +
                             " failed: " + std::strerror(errno));
  if (::listen(listen_fd_, 64) < 0) throw std::runtime_error("listen() failed");
  set_nonblocking(listen_fd_);
  socklen_t len = sizeof addr;
  if (getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) < 0)
    throw std::runtime_error("getsockname() failed");
  return ntohs(addr.sin_port);
}

std::string PsServer::stats_text() const {
  std::string s;
  auto kv = [&s](const char* k, std::uint64_t v) {
    s += k;
    s += '=';
    s += std::to_string(v);
    s += '\n';
  };
  kv("gets", counters_.gets);
  kv("puts", counters_.puts);
  kv("stats", counters_.stats);
  kv("rows_read", counters_.rows_read);
  kv("rows_written", counters_.rows_written);
  kv("rows_rejected", counters_.rows_rejected);
  kv("errors", counters_.errors);
  kv("row_begin", cfg_.row_begin);
  kv("row_end", cfg_.row_end);
  kv("dim", cfg_.dim);
  return s;
}

namespace {

template <typename T>
bool row_finite(const unsigned char* p, std::uint32_t dim) {
  for (std::uint32_t j = 0; j < dim; ++j) {
    T v;
    std::memcpy(&v, p + j * sizeof(T), sizeof(T));
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

} // namespace

std::string PsServer::serve_get(const std::vector<std::uint64_t>& ids) {
  const std::size_t vsize = dtype_size(cfg_.dtype);
  const std::size_t row_bytes = cfg_.dim * vsize;
  for (auto id : ids)
    if (id < cfg_.row_begin || id >= cfg_.row_end) {
      ++counters_.errors;
      std::string payload;
      io::put_u64(payload, id);
      return wire::encode_response(wire::Status::out_of_range, payload);
    }
  ++counters_.gets;
  counters_.rows_read += ids.size();
  std::string payload;
  payload.reserve(ids.size() * row_bytes);
  for (auto id : ids) {
    const char* src = cfg_.dtype == Dtype::f32
                          ? reinterpret_cast<const char*>(table_f32_.row(id - cfg_.row_begin).data())
                          : reinterpret_cast<const char*>(table_f64_.row(id - cfg_.row_begin).data());
    payload.append(src, row_bytes);
  }
  return wire::encode_response(wire::Status::ok, payload);
}

std::string PsServer::serve_put(const std::vector<std::uint64_t>& ids,
                                const unsigned char* values) {
  const std::size_t vsize = dtype_size(cfg_.dtype);
  const std::size_t row_bytes = cfg_.dim * vsize;
  ++counters_.puts;
  std::vector<std::uint64_t> rejected;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::uint64_t id = ids[i];
    const unsigned char* row = values + i * row_bytes;
    bool ok = id >= cfg_.row_begin && id < cfg_.row_end;
    if (ok)
      ok = cfg_.dtype == Dtype::f32 ? row_finite<float>(row, cfg_.dim)
                                    : row_finite<double>(row, cfg_.dim);
    if (!ok) {
      rejected.push_back(id);
      continue;
    }
    char* dst = cfg_.dtype == Dtype::f32
                    ? reinterpret_cast<char*>(table_f32_.row(id - cfg_.row_begin).data())
                    : reinterpret_cast<char*>(table_f64_.row(id - cfg_.row_begin).data());
    std::memcpy(dst, row, row_bytes);
    ++counters_.rows_written;
  }
  if (rejected.empty()) return wire::encode_response(wire::Status::ok, "");
  counters_.rows_rejected += rejected.size();
  std::string payload;
  io::put_u32(payload, static_cast<std::uint32_t>(rejected.size()));
  for (auto id : rejected) io::put_u64(payload, id);
  return wire::encode_response(wire::Status::partial, payload);
}

void PsServer::handle_frame(Conn& c, const char* body, std::size_t len) {
  wire::Request req;
  try {
    req = wire::parse_request(body, len, dtype_size(cfg_.dtype));
  } catch (const std::exception& e) {
    ++counters_.errors;
    c.out += wire::encode_response(wire::Status::malformed, e.what());
    return;
  }
  if (req.op == wire::Op::shutdown) {
    shutdown_seen_ = true;
    c.out += wire::encode_response(wire::Status::ok, "");
    return;
  }
  if (req.op == wire::Op::stats) {
    ++counters_.stats;
    c.out += wire::encode_response(wire::Status::ok, stats_text());
    return;
  }
  if (req.vtype != cfg_.vtype) {
    ++counters_.errors;
    std::string payload(1, static_cast<char>(cfg_.vtype));
    c.out += wire::encode_response(wire::Status::bad_vtype, payload);
    return;
  }
  if (req.op == wire::Op::put && req.dim != cfg_.dim) {
    ++counters_.errors;
    std::string payload;
    io::put_u32(payload, cfg_.dim);
    c.out += wire::encode_response(wire::Status::dim_mismatch, payload);
    return;
  }
  c.out += req.op == wire::Op::get ? serve_get(req.ids) : serve_put(req.ids, req.values);
}

void PsServer::run() {
  if (listen_fd_ < 0) throw std::logic_error("server: listen() not called");
  std::vector<Conn> conns;

  auto drop = [&](std::size_t i) {
    ::close(conns[i].fd);
    conns.erase(conns.begin() + static_cast<std::ptrdiff_t>(i));
  };

  while (!stop_.load(std::memory_order_relaxed)) {
    // Leave once the shutdown ack has been flushed everywhere.
    if (shutdown_seen_) {
      bool pending = false;
      for (const auto& c : conns)
        if (c.out_at < c.out.size()) pending = true;
      if (!pending) break;
    }

    std::vector<pollfd> fds;
    fds.push_back({listen_fd_, POLLIN, 0});
    for (const auto& c : conns) {
      short ev = POLLIN;
      if (c.out_at < c.out.size()) ev |= POLLOUT;
      fds.push_back({c.fd, ev, 0});
    }
    int rc = ::poll(fds.data(), fds.size(), 50);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("poll() failed");
    }
    if (rc == 0) continue;

    // Connections accepted below are polled next iteration; only the first
    // n_polled entries of conns correspond to fds.
    const std::size_t n_polled = fds.size() - 1;
    if (fds[0].revents & POLLIN) {
      for (;;) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        set_nonblocking(fd);
        int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        Conn c;
        c.fd = fd;
        conns.push_back(std::move(c));
      }
    }

    // Iterate backwards so drop() does not disturb unprocessed indices.
    for (std::size_t i = n_polled; i-- > 0;) {
      auto& c = conns[i];
      const auto& pfd = fds[i + 1];
      // Read before acting on HUP so a half-closed peer's final frames are
      // still served.
      if ((pfd.revents & (POLLERR | POLLNVAL)) ||
          ((pfd.revents & POLLHUP) && !(pfd.revents & POLLIN))) {
        drop(i);
        continue;
      }
      if (pfd.revents & POLLIN) {
        char buf[64 * 1024];
        bool eof = false;
        for (;;) {
          ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
          if (n > 0) {
            c.in.append(buf, static_cast<std::size_t>(n));
            continue;
          }
          if (n == 0) eof = true;
          break;
        }
        // Process every complete frame in the buffer.
        std::size_t at = 0;
        bool fatal = false;
        while (c.in.size() - at >= 4) {
          io::Reader r(c.in.data() + at, 4);
          std::uint32_t flen = r.u32();
          if (flen > wire::kMaxFrame || flen == 0) {
            fatal = true;
            break;
          }
          if (c.in.size() - at - 4 < flen) break;
          handle_frame(c, c.in.data() + at + 4, flen);
          at += 4 + flen;
        }
        c.in.erase(0, at);
        if (fatal) {
          ++counters_.errors;
          drop(i);
          continue;
        }
        if (eof && c.out_at >= c.out.size()) {
          drop(i);
          continue;
        }
        if (eof) c.closing = true;
      }
      if (c.out_at < c.out.size()) {
        ssize_t n = ::send(c.fd, c.out.data() + c.out_at, c.out.size() - c.out_at,
                           MSG_NOSIGNAL);
        if (n > 0) {
          c.out_at += static_cast<std::size_t>(n);
          if (c.out_at == c.out.size()) {
            c.out.clear();
            c.out_at = 0;
            if (c.closing) {
              drop(i);
              continue;
            }
          }
        } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) {
          drop(i);
          continue;
        }
      }
    }
  }
  for (auto& c : conns) ::close(c.fd);
  ::close(listen_fd_);
  listen_fd_ = -1;
}

} // namespace grembed
