#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "grembed/rng.hpp"
#include "grembed/shard_io.hpp"
#include "support/temp_dir.hpp"

using namespace grembed;
using grembed::test::TempDir;

namespace {

VertexRef v(std::uint64_t id, std::uint8_t t = 0) { return {t, id}; }

TrainingRow row(std::uint64_t in, std::uint64_t ctx, std::vector<std::uint64_t> negs,
                std::uint8_t t = 0) {
  TrainingRow r;
  r.input = v(in, t);
  r.context = v(ctx, t);
  for (auto n : negs) r.negatives.push_back(v(n, t));
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<TrainingRow> random_rows(std::size_t count, std::uint16_t k, std::uint64_t seed) {
  auto rng = make_engine(seed);
  std::vector<TrainingRow> rows;
  for (std::size_t i = 0; i < count; ++i) {
    TrainingRow r;
    r.input = {static_cast<std::uint8_t>(bounded(rng, 3)), bounded(rng, 1000)};
    r.context = {static_cast<std::uint8_t>(bounded(rng, 3)), bounded(rng, 1000)};
    for (std::uint16_t j = 0; j < k; ++j)
      r.negatives.push_back({r.context.vtype, bounded(rng, 1000)});
    rows.push_back(std::move(r));
  }
  return rows;
}

} // namespace

TEST_CASE("binary layout matches the documented format byte for byte") {
  TempDir tmp;
  write_shard(tmp.file("one.gwlk"), std::vector<TrainingRow>{row(2, 3, {5})}, 1, false);
  // magic, version=1, k=1, rows=1, typed=0, then refs (2,3,5) as u8+u64 LE
  const unsigned char expect[] = {
      'G', 'W', 'L', 'K', 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0,
      0, 2, 0, 0, 0, 0, 0, 0, 0,
      0, 3, 0, 0, 0, 0, 0, 0, 0,
      0, 5, 0, 0, 0, 0, 0, 0, 0};
  std::string bytes = slurp(tmp.file("one.gwlk"));
  REQUIRE(bytes.size() == sizeof(expect));
  CHECK(std::memcmp(bytes.data(), expect, sizeof(expect)) == 0);
}

TEST_CASE("shard round-trips rows exactly") {
  TempDir tmp;
  for (std::uint16_t k : {0, 1, 5}) {
    auto rows = random_rows(137, k, mix_seed(k, 0x73686172));
    write_shard(tmp.file("r.gwlk"), rows, k, true);
    ShardHeader h;
    auto back = read_shard(tmp.file("r.gwlk"), &h);
    CHECK(h.k == k);
    CHECK(h.rows == rows.size());
    CHECK(h.typed);
    CHECK(back == rows);
  }
}

TEST_CASE("peek reads only the header") {
  TempDir tmp;
  auto rows = random_rows(10, 2, 42);
  write_shard(tmp.file("p.gwlk"), rows, 2, false);
  ShardHeader h = peek_shard(tmp.file("p.gwlk"));
  CHECK(h.k == 2);
  CHECK(h.rows == 10);
  CHECK(!h.typed);
}

TEST_CASE("empty shard round-trips") {
  TempDir tmp;
  write_shard(tmp.file("e.gwlk"), std::vector<TrainingRow>{}, 3, false);
  ShardHeader h;
  CHECK(read_shard(tmp.file("e.gwlk"), &h).empty());
  CHECK(h.rows == 0);
}

TEST_CASE("write rejects rows whose negative count disagrees with k") {
  TempDir tmp;
  CHECK_THROWS_WITH_AS(
      write_shard(tmp.file("bad.gwlk"), std::vector<TrainingRow>{row(0, 1, {2, 3})}, 1, false),
      doctest::Contains("expected 1"), std::invalid_argument);
}

TEST_CASE("read rejects corrupted files") {
  TempDir tmp;
  auto rows = random_rows(4, 1, 7);
  write_shard(tmp.file("c.gwlk"), rows, 1, false);
  std::string bytes = slurp(tmp.file("c.gwlk"));

  SUBCASE("bad magic") {
    std::string b = bytes;
    b[0] = 'X';
    grembed::test::write_text(tmp.file("x.gwlk"), b);
    CHECK_THROWS_WITH_AS(read_shard(tmp.file("x.gwlk")), doctest::Contains("magic"),
                         std::runtime_error);
  }
  SUBCASE("unsupported version") {
    std::string b = bytes;
    b[4] = 9;
    grembed::test::write_text(tmp.file("x.gwlk"), b);
    CHECK_THROWS_WITH_AS(read_shard(tmp.file("x.gwlk")), doctest::Contains("version"),
                         std::runtime_error);
  }
  SUBCASE("truncated body") {
    grembed::test::write_text(tmp.file("x.gwlk"), bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS(read_shard(tmp.file("x.gwlk")));
  }
  SUBCASE("trailing garbage") {
    grembed::test::write_text(tmp.file("x.gwlk"), bytes + "zz");
    CHECK_THROWS(read_shard(tmp.file("x.gwlk")));
  }
  SUBCASE("missing file") { CHECK_THROWS(read_shard(tmp.file("nope.gwlk"))); }
}

TEST_CASE("tsv mirror round-trips rows") {
  TempDir tmp;
  auto rows = random_rows(25, 3, 11);
  write_shard_tsv(tmp.file("r.tsv"), rows);
  CHECK(read_shard_tsv(tmp.file("r.tsv")) == rows);
}

TEST_CASE("shard_rows slices are contiguous and balanced") {
  auto rows = random_rows(23, 1, 5);
  auto shards = shard_rows(rows, 4);
  REQUIRE(shards.size() == 4);
  // sizes differ by at most one, earlier shards take the remainder
  CHECK(shards[0].size() == 6);
  CHECK(shards[1].size() == 6);
  CHECK(shards[2].size() == 6);
  CHECK(shards[3].size() == 5);
  std::vector<TrainingRow> glued;
  for (auto s : shards) glued.insert(glued.end(), s.begin(), s.end());
  CHECK(glued == rows);

  CHECK(shard_rows(rows, 1).size() == 1);
  auto thin = shard_rows(std::span<const TrainingRow>(rows.data(), 2), 5);
  REQUIRE(thin.size() == 5);
  CHECK(thin[0].size() == 1);
  CHECK(thin[1].size() == 1);
  CHECK(thin[2].empty());
  CHECK_THROWS(shard_rows(rows, 0));
}
