#include "grembed/ps_client.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "grembed/wire.hpp"

namespace grembed {

namespace {

[[noreturn]] void fail_status(wire::Status status, const std::string& payload) {
  switch (status) {
    case wire::Status::malformed:
      throw std::runtime_error("server rejected request as malformed: " + payload);
    case wire::Status::out_of_range: {
      io::Reader r(payload.data(), payload.size());
      throw std::out_of_range("server: row id " + std::to_string(r.u64()) + " out of range");
    }
    case wire::Status::dim_mismatch: {
      io::Reader r(payload.data(), payload.size());
      throw std::runtime_error("server: dim mismatch, server has " + std::to_string(r.u32()));
    }
    case wire::Status::bad_vtype: {
      io::Reader r(payload.data(), payload.size());
      throw std::runtime_error("server: vertex type mismatch, server holds type " +
                               std::to_string(r.u8()));
    }
    default:
      throw std::runtime_error("server: error status " +
                               std::to_string(static_cast<int>(status)));
  }
}

} // namespace

PsClient::PsClient(const std::string& host, std::uint16_t port, int connect_attempts) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw std::invalid_argument("client: bad host address " + host);

  int delay_ms = 50;
  for (int attempt = 0;; ++attempt) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw std::runtime_error("socket() failed");
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) break;
    int err = errno;
    ::close(fd_);
    fd_ = -1;
    if (attempt + 1 >= connect_attempts)
      throw std::runtime_error("client: cannot connect to " + host + ":" +
                               std::to_string(port) + " after " +
                               std::to_string(connect_attempts) +
                               " attempts: " + std::strerror(err));
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    delay_ms = std::min(delay_ms * 2, 1000);
  }
  int one = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

PsClient::~PsClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::string PsClient::read_response() {
  auto read_exact = [this](char* dst, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
      ssize_t r = ::recv(fd_, dst + got, n - got, 0);
      if (r == 0) throw std::runtime_error("client: server closed connection");
      if (r < 0) {
        if (errno == EINTR) continue;
        throw std::runtime_error(std::string("client: recv failed: ") + std::strerror(errno));
      }
      got += static_cast<std::size_t>(r);
    }
  };
  char lenbuf[4];
  read_exact(lenbuf, 4);
  io::Reader lr(lenbuf, 4);
  std::uint32_t len = lr.u32();
  if (len == 0 || len > wire::kMaxFrame)
    throw std::runtime_error("client: bad response length " + std::to_string(len));
  std::string body(len, '\0');
  read_exact(body.data(), len);
  return body;
}

std::string PsClient::request(const std::string& frame) {
  std::size_t sent = 0;
  while (sent < frame.size()) {
    ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("client: send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
  return read_response();
}

PutAck PsClient::parse_put_ack(const std::string& resp) {
  auto status = static_cast<wire::Status>(resp[0]);
  std::string payload = resp.substr(1);
  if (status == wire::Status::ok) return {};
  if (status == wire::Status::partial) {
    io::Reader r(payload.data(), payload.size());
    std::uint32_t n = r.u32();
    PutAck ack;
    ack.rejected.resize(n);
    for (auto& id : ack.rejected) id = r.u64();
    return ack;
  }
  fail_status(status, payload);
}

template <typename T>
void PsClient::get_rows(std::uint8_t vtype, std::span<const std::uint64_t> ids,
                        std::uint32_t dim, T* out) {
  if (ids.empty()) return;
  std::string resp = request(wire::encode_get(vtype, ids));
  auto status = static_cast<wire::Status>(resp[0]);
  if (status != wire::Status::ok) fail_status(status, resp.substr(1));
  std::size_t expect = ids.size() * dim * sizeof(T);
  if (resp.size() - 1 != expect)
    throw std::runtime_error("client: GET payload size " + std::to_string(resp.size() - 1) +
                             ", expected " + std::to_string(expect));
  std::memcpy(out, resp.data() + 1, expect);
}

template <typename T>
PutAck PsClient::put_rows(std::uint8_t vtype, std::span<const std::uint64_t> ids,
                          std::uint32_t dim, const T* values) {
  if (ids.empty()) return {};
  std::string resp = request(wire::encode_put(vtype, ids, dim, values, sizeof(T)));
  return parse_put_ack(resp);
}

template <typename T>
void PsClient::put_rows_nowait(std::uint8_t vtype, std::span<const std::uint64_t> ids,
                               std::uint32_t dim, const T* values) {
  if (ids.empty()) return;
  std::string frame = wire::encode_put(vtype, ids, dim, values, sizeof(T));
  std::size_t sent = 0;
  while (sent < frame.size()) {
    ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("client: send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
  ++outstanding_;
}

PutAck PsClient::drain() {
  PutAck all;
  while (outstanding_ > 0) {
    PutAck one = parse_put_ack(read_response());
    all.rejected.insert(all.rejected.end(), one.rejected.begin(), one.rejected.end());
    --outstanding_;
  }
  return all;
}

std::map<std::string, std::uint64_t> PsClient::stats() {
  std::string resp = request(wire::encode_stats());
  auto status = static_cast<wire::Status>(resp[0]);
  if (status != wire::Status::ok) fail_status(status, resp.substr(1));
  std::map<std::string, std::uint64_t> out;
  std::istringstream in(resp.substr(1));
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = std::stoull(line.substr(eq + 1));
  }
  return out;
}

void PsClient::shutdown_server() {
  std::string resp = request(wire::encode_shutdown());
  auto status = static_cast<wire::Status>(resp[0]);
  if (status != wire::Status::ok) fail_status(status, resp.substr(1));
}

template void PsClient::get_rows<float>(std::uint8_t, std::span<const std::uint64_t>,
                                        std::uint32_t, float*);
template void PsClient::get_rows<double>(std::uint8_t, std::span<const std::uint64_t>,
                                         std::uint32_t, double*);
template PutAck PsClient::put_rows<float>(std::uint8_t, std::span<const std::uint64_t>,
                                          std::uint32_t, const float*);
template PutAck PsClient::put_rows<double>(std::uint8_t, std::span<const std::uint64_t>,
                                           std::uint32_t, const double*);
template void PsClient::put_rows_nowait<float>(std::uint8_t, std::span<const std::uint64_t>,
                                               std::uint32_t, const float*);
template void PsClient::put_rows_nowait<double>(std::uint8_t, std::span<const std::uint64_t>,
                                                std::uint32_t, const double*);

RouteTable::RouteTable(std::vector<RouteEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const RouteEntry& a, const RouteEntry& b) {
    return std::tie(a.vtype, a.begin) < std::tie(b.vtype, b.begin);
  });
  // Ranges must tile [0, count) per type with no gap or overlap.
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.end <= e.begin) throw std::invalid_argument("routes: empty range");
    bool first_of_type = i == 0 || entries_[i - 1].vtype != e.vtype;
    if (first_of_type) {
      if (e.begin != 0) throw std::invalid_argument("routes: type does not start at row 0");
    } else if (entries_[i - 1].end != e.begin) {
      throw std::invalid_argument("routes: gap or overlap at row " + std::to_string(e.begin));
    }
  }
}

RouteTable RouteTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open route table: " + path);
  std::vector<RouteEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    RouteEntry e;
    unsigned vtype, port;
    if (!(ls >> vtype >> e.label >> e.begin >> e.end >> e.host >> port) || vtype > 255 ||
        port > 65535)
      throw std::runtime_error("route table " + path + " line " + std::to_string(line_no) +
                               ": expected <vtype> <label> <begin> <end> <host> <port>");
    e.vtype = static_cast<std::uint8_t>(vtype);
    e.port = static_cast<std::uint16_t>(port);
    entries.push_back(std::move(e));
  }
  return RouteTable(std::move(entries));
}

void RouteTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write route table: " + path);
  out << "# vtype label row_begin row_end host port\n";
  for (const auto& e : entries_)
    out << unsigned(e.vtype) << ' ' << e.label << ' ' << e.begin << ' ' << e.end << ' '
        << e.host << ' ' << e.port << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::size_t RouteTable::server_for(VertexRef v) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.vtype == v.vtype && v.id >= e.begin && v.id < e.end) return i;
  }
  throw std::out_of_range("routes: no server for vertex " + std::to_string(v.vtype) + ":" +
                          std::to_string(v.id));
}

std::uint64_t RouteTable::row_count(std::uint8_t vtype) const {
  std::uint64_t n = 0;
  for (const auto& e : entries_)
    if (e.vtype == vtype) n = std::max(n, e.end);
  return n;
}

std::string RouteTable::label(std::uint8_t vtype) const {
  for (const auto& e : entries_)
    if (e.vtype == vtype) return e.label;
  throw std::out_of_range("routes: unknown vertex type " + std::to_string(vtype));
}

std::uint8_t RouteTable::type_count() const {
  std::uint8_t n = 0;
  for (const auto& e : entries_) n = std::max<std::uint8_t>(n, e.vtype + 1);
  return n;
}

RoutedClient::RoutedClient(const RouteTable& routes, int connect_attempts) : routes_(routes) {
  clients_.reserve(routes.entries().size());
  for (const auto& e : routes.entries())
    clients_.push_back(std::make_unique<PsClient>(e.host, e.port, connect_attempts));
}

template <typename T>
void RoutedClient::get_rows(std::uint8_t vtype, std::span<const std::uint64_t> ids,
                            std::uint32_t dim, T* out) {
  // Group ids per server, keeping each id's position so rows land in caller
  // order.
  std::vector<std::vector<std::uint64_t>> per_server(clients_.size());
  std::vector<std::vector<std::size_t>> positions(clients_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::size_t s = routes_.server_for({vtype, ids[i]});
    per_server[s].push_back(ids[i]);
    positions[s].push_back(i);
  }
  std::vector<T> chunk;
  for (std::size_t s = 0; s < clients_.size(); ++s) {
    if (per_server[s].empty()) continue;
    chunk.resize(per_server[s].size() * dim);
    clients_[s]->get_rows(vtype, per_server[s], dim, chunk.data());
    for (std::size_t j = 0; j < positions[s].size(); ++j)
      std::copy_n(chunk.data() + j * dim, dim, out + positions[s][j] * dim);
  }
}

template <typename T>
PutAck RoutedClient::put_rows(std::uint8_t vtype, std::span<const std::uint64_t> ids,
                              std::uint32_t dim, const T* values) {
  std::vector<std::vector<std::uint64_t>> per_server(clients_.size());
  std::vector<std::vector<T>> payload(clients_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::size_t s = routes_.server_for({vtype, ids[i]});
    per_server[s].push_back(ids[i]);
    payload[s].insert(payload[s].end(), values + i * dim, values + (i + 1) * dim);
  }
  PutAck all;
  for (std::size_t s = 0; s < clients_.size(); ++s) {
    if (per_server[s].empty()) continue;
    PutAck one = clients_[s]->put_rows(vtype, per_server[s], dim, payload[s].data());
    all.rejected.insert(all.rejected.end(), one.rejected.begin(), one.rejected.end());
  }
  return all;
}

template <typename T>
EmbeddingTable<T> RoutedClient::fetch_type(std::uint8_t vtype, std::uint32_t dim) {
  std::uint64_t rows = routes_.row_count(vtype);
  EmbeddingTable<T> table(rows, dim);
  for (std::size_t s = 0; s < routes_.entries().size(); ++s) {
    const auto& e = routes_.entries()[s];
    if (e.vtype != vtype) continue;
    std::vector<std::uint64_t> ids(e.end - e.begin);
    for (std::uint64_t i = 0; i < ids.size(); ++i) ids[i] = e.begin + i;
    clients_[s]->get_rows(vtype, ids, dim, table.row(e.begin).data());
  }
  return table;
}

std::vector<std::map<std::string, std::uint64_t>> RoutedClient::stats_all() {
  std::vector<std::map<std::string, std::uint64_t>> out;
  out.reserve(clients_.size());
  for (auto& c : clients_) out.push_back(c->stats());
  return out;
}

void RoutedClient::shutdown_all() {
  for (auto& c : clients_) c->shutdown_server();
}

template void RoutedClient::get_rows<float>(std::uint8_t, std::span<const std::uint64_t>,
                                            std::uint32_t, float*);
template void RoutedClient::get_rows<double>(std::uint8_t, std::span<const std::uint64_t>,
                                             std::uint32_t, double*);
template PutAck RoutedClient::put_rows<float>(std::uint8_t, std::span<const std::uint64_t>,
                                              std::uint32_t, const float*);
template PutAck RoutedClient::put_rows<double>(std::uint8_t, std::span<const std::uint64_t>,
                                               std::uint32_t, const double*);
template EmbeddingTable<float> RoutedClient::fetch_type<float>(std::uint8_t, std::uint32_t);
template EmbeddingTable<double> RoutedClient::fetch_type<double>(std::uint8_t, std::uint32_t);

} // namespace grembed
