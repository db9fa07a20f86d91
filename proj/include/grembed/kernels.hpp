#pragma once

#include <cstddef>

// Dense-vector inner loops for the trainer. A scalar reference build is always
// present; an AVX2/FMA build is selected at process start when the CPU
// supports it. force() and the GREMBED_KERNELS environment variable
// (scalar|avx2) override selection, mainly so tests can compare builds.
namespace grembed::kern {

enum class Isa { scalar, avx2 };

Isa active() noexcept;
bool avx2_supported() noexcept;
void force(Isa isa);

float dot(const float* a, const float* b, std::size_t n) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;

// y += alpha * x
void axpy(float* y, float alpha, const float* x, std::size_t n) noexcept;
void axpy(double* y, double alpha, const double* x, std::size_t n) noexcept;

namespace detail {

template <typename T>
struct Ops {
  T (*dot)(const T*, const T*, std::size_t);
  void (*axpy)(T*, T, const T*, std::size_t);
};

extern const Ops<float> scalar_f32;
extern const Ops<double> scalar_f64;
extern const Ops<float> avx2_f32;
extern const Ops<double> avx2_f64;

} // namespace detail

} // namespace grembed::kern
