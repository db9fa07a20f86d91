#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

// Little-endian primitives shared by the shard, checkpoint, and wire codecs.
namespace grembed::io {

inline void put_u8(std::string& buf, std::uint8_t v) { buf.push_back(static_cast<char>(v)); }

inline void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const void* data, std::size_t size)
      : p_(static_cast<const unsigned char*>(data)), n_(size) {}

  std::size_t remaining() const { return n_ - at_; }

  std::uint8_t u8() { return take(1)[0]; }

  std::uint16_t u16() {
    const unsigned char* b = take(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint32_t u32() {
    const unsigned char* b = take(4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }

  std::uint64_t u64() {
    const unsigned char* b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  const unsigned char* bytes(std::size_t n) { return take(n); }

 private:
  const unsigned char* take(std::size_t n) {
    if (at_ + n > n_) throw std::runtime_error("decode: message truncated");
    const unsigned char* r = p_ + at_;
    at_ += n;
    return r;
  }

  const unsigned char* p_;
  std::size_t n_;
  std::size_t at_ = 0;
};

inline void write_all(std::ostream& out, const std::string& buf, const std::string& what) {
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed: " + what);
}

inline std::string read_file(std::istream& in, const std::string& what) {
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed: " + what);
  return data;
}

} // namespace grembed::io
