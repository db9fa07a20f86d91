#include "grembed/eval.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "grembed/rng.hpp"

namespace grembed {

namespace {

// Canonical undirected edge list: each edge once, (u <= v); directed graphs
// keep arcs as stored.
std::vector<std::pair<VertexRef, VertexRef>> list_edges(const Graph& g) {
  std::vector<std::pair<VertexRef, VertexRef>> edges;
  for (std::uint8_t t = 0; t < g.type_count(); ++t)
    for (std::uint64_t id = 0; id < g.vertex_count(t); ++id) {
      VertexRef u{t, id};
      for (const auto& v : g.neighbors(u))
        if (!g.undirected() || !(v < u)) edges.emplace_back(u, v);
    }
  return edges;
}

} // namespace

EvalSplit split_edges(const Graph& g, double ratio, std::uint64_t seed,
                      std::uint32_t max_attempts) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("split: ratio must be in (0, 1)");
  auto edges = list_edges(g);
  auto rng = make_engine(mix_seed(seed, 0x73706c6974ull));
  for (std::size_t i = edges.size(); i > 1; --i)
    std::swap(edges[i - 1], edges[bounded(rng, i)]);

  std::uint64_t held = edges.size() - static_cast<std::uint64_t>(
                                          std::llround(ratio * static_cast<double>(edges.size())));
  EvalSplit split;
  split.ratio = ratio;
  split.seed = seed;

  std::vector<std::pair<VertexRef, VertexRef>> train_edges(edges.begin() + held, edges.end());
  split.train_graph = Graph::build(g.types(), train_edges, g.undirected());

  split.pairs.reserve(2 * held);
  for (std::uint64_t i = 0; i < held; ++i)
    split.pairs.push_back({edges[i].first, edges[i].second, true});
  for (std::uint64_t i = 0; i < held; ++i) {
    std::uint8_t ta = edges[i].first.vtype, tb = edges[i].second.vtype;
    std::uint32_t attempts = 0;
    for (;;) {
      VertexRef u{ta, bounded(rng, g.vertex_count(ta))};
      VertexRef v{tb, bounded(rng, g.vertex_count(tb))};
      // Non-edge on the full graph, so negatives cannot collide with either
      // the training edges or the held-out positives.
      if (!(u == v) && !g.has_edge(u, v)) {
        split.pairs.push_back({u, v, false});
        break;
      }
      if (++attempts >= max_attempts)
        throw std::runtime_error("split: noise space saturated after " +
                                 std::to_string(max_attempts) + " attempts");
    }
  }
  return split;
}

void save_split(const std::string& path, const EvalSplit& split) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write split: " + path);
  out << "# u v POS|NEG (ratio=" << split.ratio << " seed=" << split.seed << ")\n";
  for (const auto& p : split.pairs)
    out << unsigned(p.u.vtype) << ':' << p.u.id << ' ' << unsigned(p.v.vtype) << ':' << p.v.id
        << ' ' << (p.positive ? "POS" : "NEG") << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<EvalPair> load_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open split: " + path);
  std::vector<EvalPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  auto parse_ref = [&](const std::string& tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("split " + path + " line " + std::to_string(line_no) +
                               ": expected <vtype>:<id>");
    unsigned long t = std::stoul(tok.substr(0, colon));
    if (t > 255)
      throw std::runtime_error("split " + path + " line " + std::to_string(line_no) +
                               ": vertex type out of range");
    return VertexRef{static_cast<std::uint8_t>(t), std::stoull(tok.substr(colon + 1))};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, tag;
    if (!(ls >> a >> b >> tag) || (tag != "POS" && tag != "NEG"))
      throw std::runtime_error("split " + path + " line " + std::to_string(line_no) +
                               ": expected <u> <v> POS|NEG");
    pairs.push_back({parse_ref(a), parse_ref(b), tag == "POS"});
  }
  return pairs;
}

template <typename T>
AccuracyReport link_accuracy(std::span<const EmbeddingTable<T>> tables_by_type,
                             std::span<const EvalPair> pairs, Metric metric,
                             double threshold) {
  auto row_of = [&](VertexRef v) -> const T* {
    if (v.vtype >= tables_by_type.size() || v.id >= tables_by_type[v.vtype].rows())
      throw std::out_of_range("eval: missing embedding row for vertex " +
                              std::to_string(v.vtype) + ":" + std::to_string(v.id));
    return tables_by_type[v.vtype].row(v.id).data();
  };

  std::uint64_t pos_n = 0, pos_hit = 0, neg_n = 0, neg_hit = 0;
  std::uint32_t dim = 0;
  for (const auto& t : tables_by_type)
    if (t.rows() > 0) dim = t.dim();
  for (const auto& p : pairs) {
    double s = score(row_of(p.u), row_of(p.v), dim, metric);
    bool predicted_edge = 1.0 / (1.0 + std::exp(-s)) >= threshold;
    if (p.positive) {
      ++pos_n;
      pos_hit += predicted_edge ? 1 : 0;
    } else {
      ++neg_n;
      neg_hit += predicted_edge ? 0 : 1;
    }
  }
  AccuracyReport r;
  r.threshold = threshold;
  r.pos_acc = pos_n ? 100.0 * static_cast<double>(pos_hit) / static_cast<double>(pos_n) : 0.0;
  r.neg_acc = neg_n ? 100.0 * static_cast<double>(neg_hit) / static_cast<double>(neg_n) : 0.0;
  r.total_acc = (r.pos_acc + r.neg_acc) / 2.0;
  return r;
}

template AccuracyReport link_accuracy<float>(std::span<const EmbeddingTable<float>>,
                                             std::span<const EvalPair>, Metric, double);
template AccuracyReport link_accuracy<double>(std::span<const EmbeddingTable<double>>,
                                              std::span<const EvalPair>, Metric, double);

ConvergenceLog::ConvergenceLog(const std::string& path, const std::string& config_comment)
    : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write convergence log: " + path);
  out_ << "# config: " << config_comment << "\n";
  out_ << "step,pos_acc,neg_acc,total_acc,wall_ms\n";
  out_.flush();
}

void ConvergenceLog::add(const AccuracyReport& report, double wall_ms) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu,%.4f,%.4f,%.4f,%.1f\n",
                static_cast<unsigned long long>(report.step), report.pos_acc, report.neg_acc,
                report.total_acc, wall_ms);
  out_ << buf;
  out_.flush();
  rows_.push_back(report);
}

void ConvergenceLog::gap(std::uint64_t step, const std::string& reason) {
  out_ << "# gap step=" << step << " reason=" << reason << "\n";
  out_.flush();
}

} // namespace grembed
