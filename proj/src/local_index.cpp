#include "grembed/local_index.hpp"

#include <stdexcept>

namespace grembed {

void LocalIndexMap::intern(VertexRef v) {
  if (v.vtype >= forward_.size()) {
    forward_.resize(v.vtype + 1);
    reverse_.resize(v.vtype + 1);
  }
  auto& fwd = forward_[v.vtype];
  auto [it, inserted] = fwd.try_emplace(v.id, static_cast<std::uint32_t>(fwd.size()));
  if (inserted) reverse_[v.vtype].push_back(v.id);
}

LocalIndexMap LocalIndexMap::build(std::span<const TrainingRow> rows) {
  LocalIndexMap map;
  for (const auto& row : rows) {
    map.intern(row.input);
    map.intern(row.context);
    for (const auto& n : row.negatives) map.intern(n);
  }
  return map;
}

std::uint32_t LocalIndexMap::local(VertexRef v) const {
  if (v.vtype < forward_.size()) {
    auto it = forward_[v.vtype].find(v.id);
    if (it != forward_[v.vtype].end()) return it->second;
  }
  throw std::out_of_range("local index: vertex " + std::to_string(v.vtype) + ":" +
                          std::to_string(v.id) + " not in map");
}

std::span<const std::uint64_t> LocalIndexMap::globals(std::uint8_t vtype) const {
  if (vtype >= reverse_.size()) return {};
  return reverse_[vtype];
}

std::uint32_t LocalIndexMap::unique_count(std::uint8_t vtype) const {
  if (vtype >= reverse_.size()) return 0;
  return static_cast<std::uint32_t>(reverse_[vtype].size());
}

std::uint64_t LocalIndexMap::total_unique() const {
  std::uint64_t n = 0;
  for (const auto& r : reverse_) n += r.size();
  return n;
}

std::vector<LocalRow> relabel(std::span<const TrainingRow> rows, const LocalIndexMap& map) {
  std::vector<LocalRow> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    LocalRow lr;
    lr.input_type = row.input.vtype;
    lr.context_type = row.context.vtype;
    lr.input = map.local(row.input);
    lr.context = map.local(row.context);
    lr.negatives.reserve(row.negatives.size());
    for (const auto& n : row.negatives) {
      if (n.vtype != row.context.vtype)
        throw std::logic_error("relabel: negative type differs from context type");
      lr.negatives.push_back(map.local(n));
    }
    out.push_back(std::move(lr));
  }
  return out;
}

std::vector<TrainingRow> unrelabel(std::span<const LocalRow> rows, const LocalIndexMap& map) {
  std::vector<TrainingRow> out;
  out.reserve(rows.size());
  for (const auto& lr : rows) {
    TrainingRow row;
    row.input = {lr.input_type, map.globals(lr.input_type)[lr.input]};
    row.context = {lr.context_type, map.globals(lr.context_type)[lr.context]};
    row.negatives.reserve(lr.negatives.size());
    for (auto n : lr.negatives)
      row.negatives.push_back({lr.context_type, map.globals(lr.context_type)[n]});
    out.push_back(std::move(row));
  }
  return out;
}

} // namespace grembed
