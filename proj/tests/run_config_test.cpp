#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "grembed/run_config.hpp"
#include "support/temp_dir.hpp"

using namespace grembed;
using grembed::test::TempDir;
using grembed::test::write_text;

TEST_CASE("defaults form a valid config once a graph is set") {
  RunConfig cfg;
  CHECK(cfg.walk.walks_per_vertex == 10);
  CHECK(cfg.walk.walk_length == 2);
  CHECK(cfg.walk.context_window == 2);
  CHECK(cfg.train.learning_rate == 0.05);
  CHECK(cfg.train.batch_size == 64);
  CHECK(cfg.train.n_steps == 4);
  CHECK(cfg.train.negatives == 5);
  CHECK(cfg.dim == 16);
  CHECK(cfg.workers == 1);
  CHECK(cfg.eval_cadence == 0);
  CHECK(cfg.seed == 42);
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("graph"), std::invalid_argument);
  cfg.set("graph", "g.tsv");
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("every config key round-trips through set and echo") {
  RunConfig cfg;
  std::vector<std::pair<std::string, std::string>> kvs{
      {"graph", "edges.tsv"}, {"schema", "typed"},     {"undirected", "false"},
      {"walks_per_vertex", "3"}, {"walk_length", "5"}, {"context_window", "4"},
      {"lr", "0.1"},          {"batch_size", "16"},    {"n_steps", "2"},
      {"negatives", "7"},     {"metric", "cosine"},    {"noise", "unigram75"},
      {"max_attempts", "50"}, {"dim", "32"},           {"dtype", "f64"},
      {"workers", "4"},       {"epochs", "3"},         {"server_capacity", "123456"},
      {"budget_bytes", "654321"}, {"prefetch", "true"}, {"eval_ratio", "0.8"},
      {"eval_cadence", "100"}, {"eval_threshold", "75"}, {"seed", "9"},
      {"out", "runs/x"}};
  for (const auto& [k, v] : kvs) cfg.set(k, v);
  std::string echo = cfg.echo();
  for (const auto& [k, v] : kvs) {
    CHECK(echo.find(k + "=" + v + "\n") != std::string::npos);
  }
  CHECK(cfg.schema == EdgeSchema::typed);
  CHECK(cfg.train.metric == Metric::cosine);
  CHECK(cfg.noise == NoiseDist::unigram75);
  CHECK(cfg.dtype == Dtype::f64);
  CHECK_FALSE(cfg.undirected);
  CHECK(cfg.prefetch);

  // Echo lines feed back through set without change.
  RunConfig copy;
  std::istringstream lines(echo);
  for (std::string line; std::getline(lines, line);) {
    auto eq = line.find('=');
    copy.set(line.substr(0, eq), line.substr(eq + 1));
  }
  CHECK(copy.echo() == echo);
}

TEST_CASE("unknown keys and bad values are rejected") {
  RunConfig cfg;
  CHECK_THROWS_WITH_AS(cfg.set("grpah", "x"), doctest::Contains("unknown config key"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.set("dim", "banana"), doctest::Contains("dim"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.set("metric", "euclid"), doctest::Contains("dot|cosine"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.set("prefetch", "maybe"), doctest::Contains("boolean"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(cfg.set("dtype", "f16"), doctest::Contains("f32|f64"),
                       std::invalid_argument);
}

TEST_CASE("validation rejects out-of-range combinations") {
  RunConfig cfg;
  cfg.set("graph", "g.tsv");
  auto rejects = [&](const std::string& key, const std::string& value,
                     const std::string& needle) {
    RunConfig bad = cfg;
    bad.set(key, value);
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains(needle.c_str()),
                         std::invalid_argument);
  };
  rejects("workers", "0", "workers");
  rejects("dim", "0", "dim");
  rejects("batch_size", "0", "batch_size");
  rejects("lr", "0", "lr");
  rejects("lr", "-0.5", "lr");
  rejects("walk_length", "1", "walk_length");
  rejects("context_window", "1", "context_window");
  rejects("eval_ratio", "1.5", "eval_ratio");
  rejects("out", "", "out");
  RunConfig window = cfg;
  window.set("walk_length", "3");
  window.set("context_window", "4"); // window beyond the walk
  CHECK_THROWS_AS(window.validate(), std::invalid_argument);
}

TEST_CASE("config files parse with comments and blank lines") {
  TempDir tmp;
  write_text(tmp.file("run.cfg"),
             "# training setup\n"
             "graph=edges.tsv\n"
             "\n"
             "  dim=8\n"
             "workers=2\r\n"
             "lr=0.2\n");
  RunConfig cfg = load_config(tmp.file("run.cfg"));
  CHECK(cfg.graph_path == "edges.tsv");
  CHECK(cfg.dim == 8);
  CHECK(cfg.workers == 2);
  CHECK(cfg.train.learning_rate == 0.2);

  write_text(tmp.file("bad.cfg"), "graph edges.tsv\n");
  CHECK_THROWS_WITH_AS(load_config(tmp.file("bad.cfg")), doctest::Contains("line 1"),
                       std::runtime_error);
  CHECK_THROWS(load_config(tmp.file("missing.cfg")));
}

TEST_CASE("overrides beat the file which beats defaults") {
  TempDir tmp;
  write_text(tmp.file("run.cfg"), "graph=a.tsv\ndim=8\nseed=5\n");
  RunConfig cfg = make_config(tmp.file("run.cfg"), {"dim=32", "out=elsewhere"});
  CHECK(cfg.graph_path == "a.tsv"); // file over default
  CHECK(cfg.dim == 32);             // override over file
  CHECK(cfg.seed == 5);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.workers == 1); // untouched default

  RunConfig bare = make_config("", {"graph=b.tsv"});
  CHECK(bare.graph_path == "b.tsv");
  CHECK_THROWS_WITH_AS(make_config("", {"dim32"}), doctest::Contains("key=value"),
                       std::invalid_argument);
}
