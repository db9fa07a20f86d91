#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"

#include "grembed/kernels.hpp"
#include "grembed/rng.hpp"

using namespace grembed;

namespace {

// Sizes around every unroll/tail boundary of the vector builds.
const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17,
                                         31, 32, 33, 63, 64, 65, 100, 257};

template <typename T>
std::vector<T> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(symmetric_real(rng, 1.0));
  return v;
}

} // namespace

TEST_CASE("dot matches hand-computed values on both builds") {
  const float a[] = {1.0f, 2.0f, 3.0f};
  const float b[] = {4.0f, 5.0f, 6.0f};
  const double ad[] = {1.5, -2.0, 0.25, 8.0};
  const double bd[] = {2.0, 3.0, 4.0, 0.5};
  for (const auto* ops : {&kern::detail::scalar_f32, &kern::detail::avx2_f32}) {
    CHECK(ops->dot(a, b, 3) == 32.0f);
    CHECK(ops->dot(a, b, 0) == 0.0f);
  }
  for (const auto* ops : {&kern::detail::scalar_f64, &kern::detail::avx2_f64})
    CHECK(ops->dot(ad, bd, 4) == 3.0 - 6.0 + 1.0 + 4.0);
}

TEST_CASE("axpy matches hand-computed values on both builds") {
  for (const auto* ops : {&kern::detail::scalar_f32, &kern::detail::avx2_f32}) {
    float y[] = {1.0f, 1.0f, -2.0f};
    const float x[] = {3.0f, 4.0f, 0.5f};
    ops->axpy(y, 2.0f, x, 3);
    CHECK(y[0] == 7.0f);
    CHECK(y[1] == 9.0f);
    CHECK(y[2] == -1.0f);
  }
}

TEST_CASE("scalar and avx2 builds agree within rounding") {
  if (!kern::avx2_supported()) return;
  auto rng = make_engine(mix_seed(99, 0x6b65726e));
  for (std::size_t n : kSizes) {
    auto af = random_vec<float>(n, rng);
    auto bf = random_vec<float>(n, rng);
    float sf = kern::detail::scalar_f32.dot(af.data(), bf.data(), n);
    float vf = kern::detail::avx2_f32.dot(af.data(), bf.data(), n);
    // FMA and accumulator-order differences only; magnitudes here are O(n).
    CHECK(std::abs(sf - vf) <= 1e-5f * (1.0f + static_cast<float>(n)));

    auto ad = random_vec<double>(n, rng);
    auto bd = random_vec<double>(n, rng);
    double sd = kern::detail::scalar_f64.dot(ad.data(), bd.data(), n);
    double vd = kern::detail::avx2_f64.dot(ad.data(), bd.data(), n);
    CHECK(std::abs(sd - vd) <= 1e-13 * (1.0 + static_cast<double>(n)));

    auto y1 = random_vec<float>(n, rng);
    auto y2 = y1;
    auto x = random_vec<float>(n, rng);
    kern::detail::scalar_f32.axpy(y1.data(), 0.37f, x.data(), n);
    kern::detail::avx2_f32.axpy(y2.data(), 0.37f, x.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-6f);
  }
}

TEST_CASE("force selects the build used by the dispatching entry points") {
  kern::Isa before = kern::active();

  kern::force(kern::Isa::scalar);
  CHECK(kern::active() == kern::Isa::scalar);
  const float a[] = {1.0f, 2.0f};
  const float b[] = {3.0f, 4.0f};
  CHECK(kern::dot(a, b, 2) == 11.0f);

  kern::force(kern::Isa::avx2);
  if (kern::avx2_supported())
    CHECK(kern::active() == kern::Isa::avx2);
  else
    CHECK(kern::active() == kern::Isa::scalar); // silently falls back
  CHECK(kern::dot(a, b, 2) == 11.0f);

  kern::force(before);
}
