#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace grembed {

// Value width on the wire and in checkpoints.
enum class Dtype : std::uint8_t { f32 = 4, f64 = 8 };

inline std::size_t dtype_size(Dtype d) { return static_cast<std::size_t>(d); }

template <typename T>
inline constexpr Dtype dtype_of = sizeof(T) == 4 ? Dtype::f32 : Dtype::f64;

// Dense row-major matrix of embedding rows.
template <typename T>
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::uint64_t rows, std::uint32_t dim)
      : rows_(rows), dim_(dim), data_(rows * dim, T(0)) {}

  std::uint64_t rows() const { return rows_; }
  std::uint32_t dim() const { return dim_; }

  std::span<T> row(std::uint64_t r) {
    return {data_.data() + r * dim_, dim_};
  }
  std::span<const T> row(std::uint64_t r) const {
    return {data_.data() + r * dim_, dim_};
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::uint64_t rows_ = 0;
  std::uint32_t dim_ = 0;
  std::vector<T> data_;
};

// Row r is filled from an engine seeded by (seed, r) with dim draws uniform in
// [-0.5/dim, 0.5/dim). A server holding rows [begin, end) therefore
// initializes exactly the same values as the matching slice of a full table,
// whatever the partitioning.
template <typename T>
EmbeddingTable<T> init_embedding_rows(std::uint64_t row_begin, std::uint64_t row_end,
                                      std::uint32_t dim, std::uint64_t seed);

template <typename T>
EmbeddingTable<T> init_embeddings(std::uint64_t count, std::uint32_t dim, std::uint64_t seed) {
  return init_embedding_rows<T>(0, count, dim, seed);
}

// Checkpoint file, magic "GEMB" version 1, little-endian:
//   magic[4] | version u16 | label_len u16 | label | row_count u64 | dim u32 |
//   dtype u8 | row-major values.
struct CheckpointInfo {
  std::string label;
  std::uint64_t rows = 0;
  std::uint32_t dim = 0;
  Dtype dtype = Dtype::f32;
};

template <typename T>
void save_checkpoint(const std::string& path, const std::string& label,
                     const EmbeddingTable<T>& table);

CheckpointInfo peek_checkpoint(const std::string& path);

// Fails if the stored dtype does not match T.
template <typename T>
EmbeddingTable<T> load_checkpoint(const std::string& path, std::string* label = nullptr);

} // namespace grembed
