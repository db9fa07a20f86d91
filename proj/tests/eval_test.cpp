#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "grembed/eval.hpp"
#include "grembed/rng.hpp"
#include "support/temp_dir.hpp"

using namespace grembed;
using grembed::test::TempDir;

namespace {

Graph ring_graph(std::uint64_t n) {
  std::vector<std::pair<VertexRef, VertexRef>> edges;
  for (std::uint64_t i = 0; i < n; ++i) edges.push_back({{0, i}, {0, (i + 1) % n}});
  return Graph::build({{"v", n}}, edges, true);
}

std::set<std::pair<std::uint64_t, std::uint64_t>> canonical_edges(const Graph& g) {
  std::set<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t i = 0; i < g.vertex_count(0); ++i)
    for (const auto& v : g.neighbors({0, i}))
      out.insert({std::min(i, v.id), std::max(i, v.id)});
  return out;
}

} // namespace

TEST_CASE("split holds out the requested share with one negative per positive") {
  Graph g = ring_graph(100);
  auto split = split_edges(g, 0.9, 7);
  REQUIRE(split.pairs.size() == 20);
  std::uint64_t pos = 0, neg = 0;
  for (const auto& p : split.pairs) (p.positive ? pos : neg)++;
  CHECK(pos == 10);
  CHECK(neg == 10);
  CHECK(split.train_graph.edge_count() == 90);
  CHECK(split.ratio == 0.9);
  CHECK(split.seed == 7);

  // Train edges plus held positives tile the original edge set.
  auto train = canonical_edges(split.train_graph);
  for (const auto& p : split.pairs)
    if (p.positive) {
      auto key = std::make_pair(std::min(p.u.id, p.v.id), std::max(p.u.id, p.v.id));
      CHECK(train.count(key) == 0);
      CHECK(g.has_edge(p.u, p.v));
      train.insert(key);
    }
  CHECK(train == canonical_edges(g));
}

TEST_CASE("split negatives are genuine non-edges with matched types") {
  std::vector<std::pair<VertexRef, VertexRef>> edges;
  auto rng = make_engine(5);
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  while (seen.size() < 60) {
    std::uint64_t a = bounded(rng, 20), b = bounded(rng, 20);
    if (seen.insert({a, b}).second) edges.push_back({{0, a}, {1, b}});
  }
  Graph g = Graph::build({{"user", 20}, {"item", 20}}, edges, true);
  auto split = split_edges(g, 0.8, 11);
  std::uint64_t held = split.pairs.size() / 2;
  CHECK(held == 12);
  for (std::uint64_t i = 0; i < held; ++i) {
    const auto& p = split.pairs[i];
    const auto& n = split.pairs[held + i];
    CHECK(p.positive);
    CHECK_FALSE(n.positive);
    CHECK(n.u.vtype == p.u.vtype);
    CHECK(n.v.vtype == p.v.vtype);
    CHECK_FALSE(g.has_edge(n.u, n.v)); // non-edge on the full graph
    CHECK_FALSE(n.u == n.v);
  }
}

TEST_CASE("split is deterministic in the seed") {
  Graph g = ring_graph(50);
  auto a = split_edges(g, 0.9, 3);
  auto b = split_edges(g, 0.9, 3);
  auto c = split_edges(g, 0.9, 4);
  CHECK(a.pairs == b.pairs);
  CHECK(a.pairs != c.pairs);
}

TEST_CASE("split rejects bad ratios and saturated graphs") {
  Graph g = ring_graph(10);
  CHECK_THROWS_AS(split_edges(g, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_edges(g, 1.0, 1), std::invalid_argument);

  // Complete graph: every candidate negative is an edge or a self-pair.
  std::vector<std::pair<VertexRef, VertexRef>> edges;
  for (std::uint64_t i = 0; i < 4; ++i)
    for (std::uint64_t j = i + 1; j < 4; ++j) edges.push_back({{0, i}, {0, j}});
  Graph k4 = Graph::build({{"v", 4}}, edges, true);
  CHECK_THROWS_WITH_AS(split_edges(k4, 0.5, 1, 50), doctest::Contains("saturated"),
                       std::runtime_error);
}

TEST_CASE("split files round-trip") {
  TempDir tmp;
  Graph g = ring_graph(40);
  auto split = split_edges(g, 0.75, 9);
  save_split(tmp.file("split.tsv"), split);
  CHECK(load_split(tmp.file("split.tsv")) == split.pairs);
}

TEST_CASE("split loader reports malformed lines") {
  TempDir tmp;
  grembed::test::write_text(tmp.file("a.tsv"), "# ok\n0:1 0:2 MAYBE\n");
  CHECK_THROWS_WITH_AS(load_split(tmp.file("a.tsv")), doctest::Contains("line 2"),
                       std::runtime_error);
  grembed::test::write_text(tmp.file("b.tsv"), "0:1 3 POS\n");
  CHECK_THROWS_WITH_AS(load_split(tmp.file("b.tsv")), doctest::Contains("<vtype>:<id>"),
                       std::runtime_error);
  grembed::test::write_text(tmp.file("c.tsv"), "999:1 0:2 POS\n");
  CHECK_THROWS_WITH_AS(load_split(tmp.file("c.tsv")), doctest::Contains("out of range"),
                       std::runtime_error);
  CHECK_THROWS(load_split(tmp.file("missing.tsv")));
}

TEST_CASE("link accuracy matches a hand-scored example") {
  std::vector<EmbeddingTable<double>> tables;
  tables.emplace_back(4, 1);
  tables[0].row(0)[0] = 1.0;
  tables[0].row(1)[0] = 2.0;
  tables[0].row(2)[0] = -1.0;
  tables[0].row(3)[0] = 0.0;
  std::vector<EvalPair> pairs{
      {{0, 0}, {0, 1}, true},  // score  2 -> edge, hit
      {{0, 0}, {0, 2}, true},  // score -1 -> non-edge, miss
      {{0, 0}, {0, 3}, false}, // score  0 -> tie predicts edge, miss
      {{0, 1}, {0, 2}, false}, // score -2 -> non-edge, hit
  };
  auto r = link_accuracy<double>(tables, pairs, Metric::dot);
  CHECK(r.pos_acc == 50.0);
  CHECK(r.neg_acc == 50.0);
  CHECK(r.total_acc == 50.0);
  CHECK(r.threshold == 0.5);

  // A higher threshold flips the borderline positive score.
  tables[0].row(2)[0] = 0.1;
  std::vector<EvalPair> close{{{0, 0}, {0, 2}, true}};
  CHECK(link_accuracy<double>(tables, close, Metric::dot, 0.5).pos_acc == 100.0);
  CHECK(link_accuracy<double>(tables, close, Metric::dot, 0.6).pos_acc == 0.0);
}

TEST_CASE("separable embeddings score perfectly") {
  std::vector<EmbeddingTable<float>> tables;
  tables.emplace_back(4, 2);
  float rows[4][2] = {{1, 0}, {1, 0.5f}, {-1, 0}, {-1, -0.5f}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) tables[0].row(i)[j] = rows[i][j];
  std::vector<EvalPair> pairs{{{0, 0}, {0, 1}, true},  {{0, 2}, {0, 3}, true},
                              {{0, 0}, {0, 2}, false}, {{0, 1}, {0, 3}, false}};
  for (Metric m : {Metric::dot, Metric::cosine}) {
    auto r = link_accuracy<float>(tables, pairs, m);
    CHECK(r.pos_acc == 100.0);
    CHECK(r.neg_acc == 100.0);
    CHECK(r.total_acc == 100.0);
  }
}

TEST_CASE("all-zero embeddings predict every pair positive") {
  std::vector<EmbeddingTable<float>> tables;
  tables.emplace_back(6, 4); // zero-initialized
  std::vector<EvalPair> pairs;
  for (std::uint64_t i = 0; i < 6; ++i)
    pairs.push_back({{0, i}, {0, (i + 1) % 6}, i % 2 == 0});
  for (Metric m : {Metric::dot, Metric::cosine}) {
    auto r = link_accuracy<float>(tables, pairs, m);
    CHECK(r.pos_acc == 100.0);
    CHECK(r.neg_acc == 0.0);
    CHECK(r.total_acc == 50.0);
  }
}

TEST_CASE("total accuracy is exactly the mean of the class accuracies") {
  auto rng = make_engine(88);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EmbeddingTable<double>> tables;
    tables.push_back(init_embeddings<double>(10, 3, mix_seed(88, trial)));
    std::vector<EvalPair> pairs;
    std::size_t n = 1 + bounded(rng, 40);
    for (std::size_t i = 0; i < n; ++i)
      pairs.push_back({{0, bounded(rng, 10)}, {0, bounded(rng, 10)}, bounded(rng, 2) == 0});
    auto r = link_accuracy<double>(tables, pairs, Metric::dot);
    CHECK(r.total_acc == (r.pos_acc + r.neg_acc) / 2.0);

    std::uint64_t pos_n = 0, pos_hit = 0, neg_n = 0, neg_hit = 0;
    for (const auto& p : pairs) {
      double s = score(tables[0].row(p.u.id).data(), tables[0].row(p.v.id).data(), 3,
                       Metric::dot);
      bool edge = 1.0 / (1.0 + std::exp(-s)) >= 0.5;
      (p.positive ? pos_n : neg_n)++;
      if (p.positive && edge) ++pos_hit;
      if (!p.positive && !edge) ++neg_hit;
    }
    CHECK(r.pos_acc == (pos_n ? 100.0 * pos_hit / pos_n : 0.0));
    CHECK(r.neg_acc == (neg_n ? 100.0 * neg_hit / neg_n : 0.0));
  }
}

TEST_CASE("a pair referencing a missing row is an error") {
  std::vector<EmbeddingTable<float>> tables;
  tables.emplace_back(3, 2);
  std::vector<EvalPair> bad_id{{{0, 0}, {0, 3}, true}};
  CHECK_THROWS_WITH_AS(link_accuracy<float>(tables, bad_id, Metric::dot),
                       doctest::Contains("missing embedding row"), std::out_of_range);
  std::vector<EvalPair> bad_type{{{1, 0}, {0, 1}, true}};
  CHECK_THROWS_AS(link_accuracy<float>(tables, bad_type, Metric::dot), std::out_of_range);
}

TEST_CASE("convergence log writes a stable csv") {
  TempDir tmp;
  std::string path = tmp.file("conv.csv");
  {
    ConvergenceLog log(path, "workers=2 dim=4");
    AccuracyReport r;
    r.step = 5;
    r.pos_acc = 50.0;
    r.neg_acc = 100.0;
    r.total_acc = 75.0;
    log.add(r, 12.5);
    log.gap(10, "fetch failed");
    r.step = 15;
    r.pos_acc = r.neg_acc = r.total_acc = 80.0;
    log.add(r, 20.0);
    REQUIRE(log.rows().size() == 2);
    CHECK(log.rows()[1].step == 15);
  }
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "# config: workers=2 dim=4");
  CHECK(lines[1] == "step,pos_acc,neg_acc,total_acc,wall_ms");
  CHECK(lines[2] == "5,50.0000,100.0000,75.0000,12.5");
  CHECK(lines[3] == "# gap step=10 reason=fetch failed");
  CHECK(lines[4] == "15,80.0000,80.0000,80.0000,20.0");
}
