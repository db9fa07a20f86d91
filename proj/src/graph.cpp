#include "grembed/graph.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace grembed {

std::uint64_t Graph::total_vertices() const {
  std::uint64_t n = 0;
  for (const auto& t : types_) n += t.count;
  return n;
}

std::span<const VertexRef> Graph::neighbors(VertexRef v) const {
  if (v.vtype >= types_.size() || v.id >= types_[v.vtype].count)
    throw std::out_of_range("graph: vertex (" + std::to_string(v.vtype) + "," +
                            std::to_string(v.id) + ") out of range");
  const auto& off = offsets_[v.vtype];
  return {adj_.data() + off[v.id], adj_.data() + off[v.id + 1]};
}

bool Graph::has_edge(VertexRef u, VertexRef v) const {
  auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

int Graph::type_index(std::string_view label) const {
  for (std::size_t i = 0; i < types_.size(); ++i)
    if (types_[i].label == label) return static_cast<int>(i);
  return -1;
}

Graph Graph::build(std::vector<VertexTypeInfo> types,
                   const std::vector<std::pair<VertexRef, VertexRef>>& edges,
                   bool undirected) {
  if (types.size() > 256) throw std::invalid_argument("graph: more than 256 vertex types");
  Graph g;
  g.types_ = std::move(types);
  g.undirected_ = undirected;

  auto check = [&](VertexRef v) {
    if (v.vtype >= g.types_.size() || v.id >= g.types_[v.vtype].count)
      throw std::out_of_range("graph: edge endpoint (" + std::to_string(v.vtype) + "," +
                              std::to_string(v.id) + ") out of range");
  };

  // Arcs as (src, dst), symmetric closure for undirected graphs, then sort and
  // dedup once; self-loops stored a single time.
  std::vector<std::pair<VertexRef, VertexRef>> arcs;
  arcs.reserve(edges.size() * (undirected ? 2 : 1));
  for (const auto& [u, v] : edges) {
    check(u);
    check(v);
    arcs.emplace_back(u, v);
    if (undirected && !(u == v)) arcs.emplace_back(v, u);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  g.offsets_.resize(g.types_.size());
  for (std::size_t t = 0; t < g.types_.size(); ++t)
    g.offsets_[t].assign(g.types_[t].count + 1, 0);

  for (const auto& [u, v] : arcs) g.offsets_[u.vtype][u.id + 1]++;
  for (auto& off : g.offsets_) {
    std::uint64_t run = 0;
    // Offsets within one type are cumulative over that type only; the base of
    // each type's region is added below.
    for (auto& x : off) {
      x += run;
      run = x;
    }
  }
  // Make offsets global over adj_: each type's region starts after the
  // previous type's arcs.
  std::uint64_t base = 0;
  for (auto& off : g.offsets_) {
    for (auto& x : off) x += base;
    base = off.back();
  }

  g.adj_.resize(arcs.size());
  // arcs are sorted by (src, dst) which matches the offset layout, so a single
  // sweep fills adj_ already sorted within each slice.
  std::size_t i = 0;
  for (const auto& [u, v] : arcs) {
    (void)u;
    g.adj_[i++] = v;
  }

  if (undirected) {
    std::uint64_t loops = 0;
    for (const auto& [u, v] : arcs)
      if (u == v) ++loops;
    g.edge_count_ = (arcs.size() - loops) / 2 + loops;
  } else {
    g.edge_count_ = arcs.size();
  }
  return g;
}

namespace {

struct TypeState {
  std::unordered_map<std::string, std::uint64_t> dense;
  std::vector<std::string> raw_in_order;
};

VertexRef intern(const std::string& token, std::size_t line_no, bool typed,
                 const std::vector<std::string>& declared,
                 std::vector<std::string>& labels,
                 std::unordered_map<std::string, std::uint8_t>& label_index,
                 std::vector<TypeState>& state) {
  std::string label = "v";
  std::string raw = token;
  if (typed) {
    auto colon = token.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
      throw std::runtime_error("edge list line " + std::to_string(line_no) +
                               ": expected <type>:<id>, got '" + token + "'");
    label = token.substr(0, colon);
    raw = token.substr(colon + 1);
  }
  auto it = label_index.find(label);
  std::uint8_t t;
  if (it == label_index.end()) {
    if (!declared.empty() &&
        std::find(declared.begin(), declared.end(), label) == declared.end())
      throw std::runtime_error("edge list line " + std::to_string(line_no) +
                               ": unknown vertex type '" + label + "'");
    if (labels.size() >= 256)
      throw std::runtime_error("edge list line " + std::to_string(line_no) +
                               ": more than 256 vertex types");
    t = static_cast<std::uint8_t>(labels.size());
    label_index.emplace(label, t);
    labels.push_back(label);
    state.emplace_back();
  } else {
    t = it->second;
  }
  auto& ts = state[t];
  auto [slot, inserted] = ts.dense.try_emplace(raw, ts.dense.size());
  if (inserted) ts.raw_in_order.push_back(raw);
  return {t, slot->second};
}

} // namespace

Graph load_edge_list(const std::string& path, const LoadOptions& opt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);

  std::vector<std::string> labels;
  std::unordered_map<std::string, std::uint8_t> label_index;
  std::vector<TypeState> state;
  std::vector<std::pair<VertexRef, VertexRef>> edges;

  const bool typed = opt.schema == EdgeSchema::typed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t sep = line.find_first_of(" \t", first);
    if (sep == std::string::npos)
      throw std::runtime_error("edge list line " + std::to_string(line_no) +
                               ": expected two whitespace-separated endpoints");
    std::size_t second = line.find_first_not_of(" \t", sep);
    if (second == std::string::npos)
      throw std::runtime_error("edge list line " + std::to_string(line_no) +
                               ": expected two whitespace-separated endpoints");
    std::size_t end2 = line.find_first_of(" \t\r", second);
    if (end2 == std::string::npos) end2 = line.size();
    std::size_t tail = line.find_first_not_of(" \t\r", end2);
    if (tail != std::string::npos)
      throw std::runtime_error("edge list line " + std::to_string(line_no) +
                               ": trailing tokens after edge");

    std::string a = line.substr(first, sep - first);
    std::string b = line.substr(second, end2 - second);
    VertexRef u = intern(a, line_no, typed, opt.declared_types, labels, label_index, state);
    VertexRef v = intern(b, line_no, typed, opt.declared_types, labels, label_index, state);
    edges.emplace_back(u, v);
  }

  if (!opt.idmap_path.empty()) {
    std::ofstream map_out(opt.idmap_path);
    if (!map_out) throw std::runtime_error("cannot write id map: " + opt.idmap_path);
    for (std::size_t t = 0; t < labels.size(); ++t)
      for (std::size_t i = 0; i < state[t].raw_in_order.size(); ++i)
        map_out << labels[t] << '\t' << state[t].raw_in_order[i] << '\t' << i << '\n';
  }

  std::vector<VertexTypeInfo> types;
  types.reserve(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t)
    types.push_back({labels[t], state[t].dense.size()});
  return Graph::build(std::move(types), edges, opt.undirected);
}

} // namespace grembed
