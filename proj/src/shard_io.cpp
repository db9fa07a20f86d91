#include "grembed/shard_io.hpp"

#include <fstream>

#include "grembed/io_util.hpp"

namespace grembed {

namespace {

constexpr char kMagic[4] = {'G', 'W', 'L', 'K'};
constexpr std::uint16_t kVersion = 1;

void put_ref(std::string& buf, VertexRef v) {
  io::put_u8(buf, v.vtype);
  io::put_u64(buf, v.id);
}

VertexRef get_ref(io::Reader& r) {
  VertexRef v;
  v.vtype = r.u8();
  v.id = r.u64();
  return v;
}

ShardHeader parse_header(io::Reader& r, const std::string& path) {
  if (r.remaining() < 4 || std::memcmp(r.bytes(4), kMagic, 4) != 0)
    throw std::runtime_error("shard " + path + ": bad magic");
  std::uint16_t version = r.u16();
  if (version != kVersion)
    throw std::runtime_error("shard " + path + ": unsupported version " + std::to_string(version));
  ShardHeader h;
  h.k = r.u16();
  h.rows = r.u64();
  h.typed = r.u8() != 0;
  return h;
}

} // namespace

void write_shard(const std::string& path, std::span<const TrainingRow> rows,
                 std::uint16_t k, bool typed) {
  std::string buf;
  buf.reserve(17 + rows.size() * (2 + k) * 9);
  buf.append(kMagic, 4);
  io::put_u16(buf, kVersion);
  io::put_u16(buf, k);
  io::put_u64(buf, rows.size());
  io::put_u8(buf, typed ? 1 : 0);
  for (const auto& row : rows) {
    if (row.negatives.size() != k)
      throw std::invalid_argument("shard " + path + ": row has " +
                                  std::to_string(row.negatives.size()) + " negatives, expected " +
                                  std::to_string(k));
    put_ref(buf, row.input);
    put_ref(buf, row.context);
    for (const auto& n : row.negatives) put_ref(buf, n);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create shard: " + path);
  io::write_all(out, buf, path);
}

std::vector<TrainingRow> read_shard(const std::string& path, ShardHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open shard: " + path);
  std::string data = io::read_file(in, path);
  io::Reader r(data.data(), data.size());
  ShardHeader h = parse_header(r, path);
  if (r.remaining() != h.rows * (2 + h.k) * 9)
    throw std::runtime_error("shard " + path + ": body size does not match header");
  std::vector<TrainingRow> rows;
  rows.reserve(h.rows);
  for (std::uint64_t i = 0; i < h.rows; ++i) {
    TrainingRow row;
    row.input = get_ref(r);
    row.context = get_ref(r);
    row.negatives.resize(h.k);
    for (auto& n : row.negatives) n = get_ref(r);
    rows.push_back(std::move(row));
  }
  if (header) *header = h;
  return rows;
}

ShardHeader peek_shard(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open shard: " + path);
  char head[17];
  in.read(head, sizeof head);
  if (in.gcount() != sizeof head) throw std::runtime_error("shard " + path + ": truncated header");
  io::Reader r(head, sizeof head);
  return parse_header(r, path);
}

namespace {

std::string ref_str(VertexRef v) {
  return std::to_string(v.vtype) + ":" + std::to_string(v.id);
}

VertexRef parse_ref(const std::string& tok, const std::string& path, std::size_t line_no) {
  auto colon = tok.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("shard tsv " + path + " line " + std::to_string(line_no) +
                             ": expected <vtype>:<id>");
  try {
    unsigned long t = std::stoul(tok.substr(0, colon));
    if (t > 255) throw std::out_of_range("vtype");
    return {static_cast<std::uint8_t>(t), std::stoull(tok.substr(colon + 1))};
  } catch (const std::exception&) {
    throw std::runtime_error("shard tsv " + path + " line " + std::to_string(line_no) +
                             ": bad ref '" + tok + "'");
  }
}

} // namespace

void write_shard_tsv(const std::string& path, std::span<const TrainingRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create shard tsv: " + path);
  out << "# input\tcontext\tnegatives...\n";
  for (const auto& row : rows) {
    out << ref_str(row.input) << '\t' << ref_str(row.context);
    for (const auto& n : row.negatives) out << '\t' << ref_str(n);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrainingRow> read_shard_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open shard tsv: " + path);
  std::vector<TrainingRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    TrainingRow row;
    std::size_t at = 0;
    int field = 0;
    while (at <= line.size()) {
      auto tab = line.find('\t', at);
      std::string tok = line.substr(at, tab == std::string::npos ? std::string::npos : tab - at);
      if (!tok.empty()) {
        VertexRef ref = parse_ref(tok, path, line_no);
        if (field == 0) row.input = ref;
        else if (field == 1) row.context = ref;
        else row.negatives.push_back(ref);
        ++field;
      }
      if (tab == std::string::npos) break;
      at = tab + 1;
    }
    if (field < 2)
      throw std::runtime_error("shard tsv " + path + " line " + std::to_string(line_no) +
                               ": fewer than two refs");
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace grembed
