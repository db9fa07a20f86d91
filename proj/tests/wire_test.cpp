#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"

#include "grembed/wire.hpp"

using namespace grembed;

namespace {

wire::Request parse_frame(const std::string& frame, std::size_t value_size) {
  REQUIRE(frame.size() >= 4);
  std::uint32_t len;
  std::memcpy(&len, frame.data(), 4);
  REQUIRE(len == frame.size() - 4);
  return wire::parse_request(frame.data() + 4, len, value_size);
}

} // namespace

TEST_CASE("get frame bytes are frozen") {
  std::vector<std::uint64_t> ids{0x0102030405060708ull};
  std::string frame = wire::encode_get(3, ids);
  const unsigned char expect[] = {
      14, 0, 0, 0,                   // frame_len
      1, 3,                          // opcode GET, vtype 3
      1, 0, 0, 0,                    // n_ids
      0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01};
  REQUIRE(frame.size() == sizeof(expect));
  CHECK(std::memcmp(frame.data(), expect, sizeof(expect)) == 0);
}

TEST_CASE("put frame carries dim and raw values") {
  float vals[] = {1.0f, -2.0f};
  std::vector<std::uint64_t> ids{5};
  std::string frame = wire::encode_put(0, ids, 2, vals, sizeof(float));
  const unsigned char expect[] = {
      26, 0, 0, 0,
      2, 0,
      1, 0, 0, 0,
      5, 0, 0, 0, 0, 0, 0, 0,
      2, 0, 0, 0,                    // dim
      0, 0, 0x80, 0x3f,              // 1.0f
      0, 0, 0, 0xc0};                // -2.0f
  REQUIRE(frame.size() == sizeof(expect));
  CHECK(std::memcmp(frame.data(), expect, sizeof(expect)) == 0);
}

TEST_CASE("control frames have empty id lists") {
  for (auto [frame, op] : {std::pair{wire::encode_shutdown(), wire::Op::shutdown},
                           std::pair{wire::encode_stats(), wire::Op::stats}}) {
    auto req = parse_frame(frame, 4);
    CHECK(req.op == op);
    CHECK(req.ids.empty());
  }
}

TEST_CASE("requests round-trip through encode and parse") {
  std::vector<std::uint64_t> ids{7, 0, 42};
  auto get = parse_frame(wire::encode_get(9, ids), 8);
  CHECK(get.op == wire::Op::get);
  CHECK(get.vtype == 9);
  CHECK(get.ids == ids);

  std::vector<double> vals{1.5, -2.5, 0.0, 3.25, 4.0, -0.5};
  auto put = parse_frame(wire::encode_put(1, ids, 2, vals.data(), sizeof(double)), 8);
  CHECK(put.op == wire::Op::put);
  CHECK(put.vtype == 1);
  CHECK(put.ids == ids);
  CHECK(put.dim == 2);
  REQUIRE(put.value_bytes == vals.size() * sizeof(double));
  CHECK(std::memcmp(put.values, vals.data(), put.value_bytes) == 0);
}

TEST_CASE("structural violations are rejected") {
  std::vector<std::uint64_t> ids{1, 2};
  std::string get = wire::encode_get(0, ids);

  SUBCASE("unknown opcode") {
    std::string bad = get;
    bad[4] = 7;
    CHECK_THROWS_WITH_AS(parse_frame(bad, 4), doctest::Contains("opcode"),
                         std::runtime_error);
  }
  SUBCASE("id list longer than the frame") {
    std::string bad = get;
    bad[6] = 3; // claim 3 ids but carry 2
    std::uint32_t len = static_cast<std::uint32_t>(bad.size() - 4);
    std::memcpy(bad.data(), &len, 4);
    CHECK_THROWS_WITH_AS(parse_frame(bad, 4), doctest::Contains("overruns"),
                         std::runtime_error);
  }
  SUBCASE("trailing bytes after a get") {
    std::string bad = get + std::string(3, '\0');
    std::uint32_t len = static_cast<std::uint32_t>(bad.size() - 4);
    std::memcpy(bad.data(), &len, 4);
    CHECK_THROWS_WITH_AS(parse_frame(bad, 4), doctest::Contains("trailing"),
                         std::runtime_error);
  }
  SUBCASE("put value block of the wrong size") {
    float vals[4] = {1, 2, 3, 4};
    std::string put = wire::encode_put(0, ids, 2, vals, sizeof(float));
    std::string bad = put.substr(0, put.size() - 4); // drop one value
    std::uint32_t len = static_cast<std::uint32_t>(bad.size() - 4);
    std::memcpy(bad.data(), &len, 4);
    CHECK_THROWS_WITH_AS(parse_frame(bad, 4), doctest::Contains("mismatch"),
                         std::runtime_error);
  }
  SUBCASE("truncated header") {
    CHECK_THROWS(wire::parse_request(get.data() + 4, 1, 4));
  }
}

TEST_CASE("responses frame a status byte plus payload") {
  std::string resp = wire::encode_response(wire::Status::ok, "");
  const unsigned char ok[] = {1, 0, 0, 0, 0};
  REQUIRE(resp.size() == sizeof(ok));
  CHECK(std::memcmp(resp.data(), ok, sizeof(ok)) == 0);

  resp = wire::encode_response(wire::Status::malformed, "why");
  const unsigned char err[] = {4, 0, 0, 0, 2, 'w', 'h', 'y'};
  REQUIRE(resp.size() == sizeof(err));
  CHECK(std::memcmp(resp.data(), err, sizeof(err)) == 0);
}

TEST_CASE("frame cap leaves room for full-row puts but bounds memory") {
  CHECK(wire::kMaxFrame == (256u << 20));
  // A 4096-dim float put of 8k rows still fits under the cap.
  std::uint64_t big = 4 + 1 + 1 + 4 + 8192ull * (8 + 4096 * 4);
  CHECK(big < wire::kMaxFrame);
}
