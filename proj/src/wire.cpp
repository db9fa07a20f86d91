#include "grembed/wire.hpp"

namespace grembed::wire {

Request parse_request(const void* body, std::size_t len, std::size_t value_size) {
  io::Reader r(body, len);
  Request req;
  std::uint8_t op = r.u8();
  if (op < 1 || op > 4) throw std::runtime_error("bad opcode " + std::to_string(op));
  req.op = static_cast<Op>(op);
  req.vtype = r.u8();
  std::uint32_t n = r.u32();
  if (static_cast<std::uint64_t>(n) * 8 > r.remaining())
    throw std::runtime_error("id list overruns frame");
  req.ids.resize(n);
  for (auto& id : req.ids) id = r.u64();
  if (req.op == Op::put) {
    req.dim = r.u32();
    req.value_bytes = static_cast<std::size_t>(n) * req.dim * value_size;
    if (r.remaining() != req.value_bytes)
      throw std::runtime_error("value block size mismatch: have " +
                               std::to_string(r.remaining()) + ", expected " +
                               std::to_string(req.value_bytes));
    req.values = r.bytes(req.value_bytes);
  } else if (r.remaining() != 0) {
    throw std::runtime_error("trailing bytes after request");
  }
  return req;
}

namespace {

std::string encode_header(Op op, std::uint8_t vtype, std::span<const std::uint64_t> ids,
                          std::size_t extra) {
  std::string buf;
  std::size_t body = 1 + 1 + 4 + ids.size() * 8 + extra;
  buf.reserve(4 + body);
  io::put_u32(buf, static_cast<std::uint32_t>(body));
  io::put_u8(buf, static_cast<std::uint8_t>(op));
  io::put_u8(buf, vtype);
  io::put_u32(buf, static_cast<std::uint32_t>(ids.size()));
  for (auto id : ids) io::put_u64(buf, id);
  return buf;
}

} // namespace

std::string encode_get(std::uint8_t vtype, std::span<const std::uint64_t> ids) {
  return encode_header(Op::get, vtype, ids, 0);
}

std::string encode_put(std::uint8_t vtype, std::span<const std::uint64_t> ids,
                       std::uint32_t dim, const void* values, std::size_t value_size) {
  std::size_t vbytes = ids.size() * dim * value_size;
  std::string buf = encode_header(Op::put, vtype, ids, 4 + vbytes);
  io::put_u32(buf, dim);
  buf.append(static_cast<const char*>(values), vbytes);
  return buf;
}

std::string encode_shutdown() { return encode_header(Op::shutdown, 0, {}, 0); }

std::string encode_stats() { return encode_header(Op::stats, 0, {}, 0); }

std::string encode_response(Status status, const std::string& payload) {
  std::string buf;
  buf.reserve(5 + payload.size());
  io::put_u32(buf, static_cast<std::uint32_t>(1 + payload.size()));
  io::put_u8(buf, static_cast<std::uint8_t>(status));
  buf.append(payload);
  return buf;
}

} // namespace grembed::wire
