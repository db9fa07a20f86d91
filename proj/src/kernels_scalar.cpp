#include "grembed/kernels.hpp"

namespace grembed::kern::detail {

namespace {

// Four independent accumulators break the add dependency chain; the order of
// partial sums is fixed, so the reference build is deterministic.
template <typename T>
T dot_impl(const T* a, const T* b, std::size_t n) {
  T s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  T s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
void axpy_impl(T* y, T alpha, const T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

} // namespace

const Ops<float> scalar_f32{&dot_impl<float>, &axpy_impl<float>};
const Ops<double> scalar_f64{&dot_impl<double>, &axpy_impl<double>};

} // namespace grembed::kern::detail
