#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace grembed {

// Dense vertex handle. `id` is a table row index in [0, count(vtype)), not a
// raw input id; the loader owns the raw-to-dense mapping.
struct VertexRef {
  std::uint8_t vtype = 0;
  std::uint64_t id = 0;

  friend constexpr auto operator<=>(const VertexRef&, const VertexRef&) = default;
};

struct VertexRefHash {
  std::size_t operator()(const VertexRef& v) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(v.vtype) << 56) ^ v.id ^ (v.id >> 8));
  }
};

struct VertexTypeInfo {
  std::string label;
  std::uint64_t count = 0;
};

} // namespace grembed
