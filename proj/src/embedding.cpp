#include "grembed/embedding.hpp"

#include <bit>
#include <fstream>

#include "grembed/io_util.hpp"
#include "grembed/rng.hpp"

namespace grembed {

template <typename T>
EmbeddingTable<T> init_embedding_rows(std::uint64_t row_begin, std::uint64_t row_end,
                                      std::uint32_t dim, std::uint64_t seed) {
  EmbeddingTable<T> table(row_end - row_begin, dim);
  const double scale = 0.5 / dim;
  for (std::uint64_t r = row_begin; r < row_end; ++r) {
    auto rng = make_engine(mix_seed(seed, r));
    auto row = table.row(r - row_begin);
    for (auto& x : row) x = static_cast<T>(symmetric_real(rng, scale));
  }
  return table;
}

template EmbeddingTable<float> init_embedding_rows<float>(std::uint64_t, std::uint64_t,
                                                          std::uint32_t, std::uint64_t);
template EmbeddingTable<double> init_embedding_rows<double>(std::uint64_t, std::uint64_t,
                                                            std::uint32_t, std::uint64_t);

namespace {

constexpr char kMagic[4] = {'G', 'E', 'M', 'B'};
constexpr std::uint16_t kVersion = 1;

void put_value(std::string& buf, float v) { io::put_u32(buf, std::bit_cast<std::uint32_t>(v)); }
void put_value(std::string& buf, double v) { io::put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

void get_value(io::Reader& r, float& v) { v = std::bit_cast<float>(r.u32()); }
void get_value(io::Reader& r, double& v) { v = std::bit_cast<double>(r.u64()); }

CheckpointInfo parse_header(io::Reader& r, const std::string& path) {
  if (r.remaining() < 4 || std::memcmp(r.bytes(4), kMagic, 4) != 0)
    throw std::runtime_error("checkpoint " + path + ": bad magic");
  std::uint16_t version = r.u16();
  if (version != kVersion)
    throw std::runtime_error("checkpoint " + path + ": unsupported version " +
                             std::to_string(version));
  CheckpointInfo info;
  std::uint16_t label_len = r.u16();
  const unsigned char* label = r.bytes(label_len);
  info.label.assign(reinterpret_cast<const char*>(label), label_len);
  info.rows = r.u64();
  info.dim = r.u32();
  std::uint8_t dtype = r.u8();
  if (dtype != 4 && dtype != 8)
    throw std::runtime_error("checkpoint " + path + ": bad dtype " + std::to_string(dtype));
  info.dtype = static_cast<Dtype>(dtype);
  return info;
}

} // namespace

template <typename T>
void save_checkpoint(const std::string& path, const std::string& label,
                     const EmbeddingTable<T>& table) {
  if (label.size() > 0xffff) throw std::invalid_argument("checkpoint label too long");
  std::string buf;
  buf.reserve(23 + label.size() + table.rows() * table.dim() * sizeof(T));
  buf.append(kMagic, 4);
  io::put_u16(buf, kVersion);
  io::put_u16(buf, static_cast<std::uint16_t>(label.size()));
  buf.append(label);
  io::put_u64(buf, table.rows());
  io::put_u32(buf, table.dim());
  io::put_u8(buf, static_cast<std::uint8_t>(dtype_of<T>));
  const T* p = table.data();
  for (std::uint64_t i = 0, n = table.rows() * table.dim(); i < n; ++i) put_value(buf, p[i]);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create checkpoint: " + path);
  io::write_all(out, buf, path);
}

CheckpointInfo peek_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  // Header is at most 6 + 2 + 65535 + 13 bytes; read enough for any label.
  std::string head(8 + 0xffff + 13, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  io::Reader r(head.data(), head.size());
  return parse_header(r, path);
}

template <typename T>
EmbeddingTable<T> load_checkpoint(const std::string& path, std::string* label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string data = io::read_file(in, path);
  io::Reader r(data.data(), data.size());
  CheckpointInfo info = parse_header(r, path);
  if (info.dtype != dtype_of<T>)
    throw std::runtime_error("checkpoint " + path + ": dtype mismatch");
  if (r.remaining() != info.rows * info.dim * sizeof(T))
    throw std::runtime_error("checkpoint " + path + ": body size does not match header");
  EmbeddingTable<T> table(info.rows, info.dim);
  T* p = table.data();
  for (std::uint64_t i = 0, n = info.rows * info.dim; i < n; ++i) get_value(r, p[i]);
  if (label) *label = info.label;
  return table;
}

template void save_checkpoint<float>(const std::string&, const std::string&,
                                     const EmbeddingTable<float>&);
template void save_checkpoint<double>(const std::string&, const std::string&,
                                      const EmbeddingTable<double>&);
template EmbeddingTable<float> load_checkpoint<float>(const std::string&, std::string*);
template EmbeddingTable<double> load_checkpoint<double>(const std::string&, std::string*);

} // namespace grembed
