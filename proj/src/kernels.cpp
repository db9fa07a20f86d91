#include "grembed/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace grembed::kern {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("GREMBED_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<const detail::Ops<float>*> g_f32{nullptr};
std::atomic<const detail::Ops<double>*> g_f64{nullptr};
std::atomic<Isa> g_isa{Isa::scalar};

struct Init {
  Init() { force(initial_isa()); }
} g_init;

} // namespace

bool avx2_supported() noexcept { return cpu_has_avx2(); }

Isa active() noexcept { return g_isa.load(std::memory_order_relaxed); }

void force(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) isa = Isa::scalar;
  g_f32.store(isa == Isa::avx2 ? &detail::avx2_f32 : &detail::scalar_f32, std::memory_order_relaxed);
  g_f64.store(isa == Isa::avx2 ? &detail::avx2_f64 : &detail::scalar_f64, std::memory_order_relaxed);
  g_isa.store(isa, std::memory_order_relaxed);
}

float dot(const float* a, const float* b, std::size_t n) noexcept {
  return g_f32.load(std::memory_order_relaxed)->dot(a, b, n);
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  return g_f64.load(std::memory_order_relaxed)->dot(a, b, n);
}

void axpy(float* y, float alpha, const float* x, std::size_t n) noexcept {
  g_f32.load(std::memory_order_relaxed)->axpy(y, alpha, x, n);
}

void axpy(double* y, double alpha, const double* x, std::size_t n) noexcept {
  g_f64.load(std::memory_order_relaxed)->axpy(y, alpha, x, n);
}

} // namespace grembed::kern
