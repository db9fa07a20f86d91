#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grembed/vertex.hpp"

namespace grembed {

// Immutable typed adjacency in CSR form: one offset array per vertex type,
// neighbor slices sorted by (vtype, id). All reads are const and safe to share
// across threads without locks.
class Graph {
 public:
  Graph() = default;

  // counts[t] fixes the dense id space per type; edges may repeat (duplicates
  // are dropped). With undirected=true each edge is stored in both endpoint
  // slices.
  static Graph build(std::vector<VertexTypeInfo> types,
                     const std::vector<std::pair<VertexRef, VertexRef>>& edges,
                     bool undirected);

  std::uint8_t type_count() const { return static_cast<std::uint8_t>(types_.size()); }
  const std::vector<VertexTypeInfo>& types() const { return types_; }
  std::uint64_t vertex_count(std::uint8_t t) const { return types_.at(t).count; }
  std::uint64_t total_vertices() const;
  // Stored adjacency slots; an undirected edge occupies two.
  std::uint64_t arc_count() const { return adj_.size(); }
  std::uint64_t edge_count() const { return edge_count_; }
  bool undirected() const { return undirected_; }

  std::span<const VertexRef> neighbors(VertexRef v) const;
  std::uint64_t degree(VertexRef v) const { return neighbors(v).size(); }
  bool has_edge(VertexRef u, VertexRef v) const;

  // -1 when the label is unknown.
  int type_index(std::string_view label) const;

 private:
  std::vector<VertexTypeInfo> types_;
  // offsets_[t] has vertex_count(t)+1 entries indexing into adj_.
  std::vector<std::vector<std::uint64_t>> offsets_;
  std::vector<VertexRef> adj_;
  std::uint64_t edge_count_ = 0;
  bool undirected_ = true;
};

enum class EdgeSchema { untyped, typed };

struct LoadOptions {
  EdgeSchema schema = EdgeSchema::untyped;
  bool undirected = true;
  // When set, raw id -> dense id assignments are appended here as
  // "<type_label>\t<raw_id>\t<dense_id>" lines.
  std::string idmap_path;
  // When non-empty, labels outside this list are an error; otherwise labels
  // are discovered in first-seen order. Untyped input uses the single label "v".
  std::vector<std::string> declared_types;
};

// Text edge list, one edge per line, '#' comments and blank lines skipped.
// Untyped: "<src> <dst>". Typed: "<type>:<raw> <type>:<raw>". Raw ids are
// arbitrary tokens; dense ids are assigned per type in first-seen order.
Graph load_edge_list(const std::string& path, const LoadOptions& opt);

} // namespace grembed
