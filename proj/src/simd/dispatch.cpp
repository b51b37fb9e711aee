#include "bayesqp/simd/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace bayesqp::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend resolve_initial() {
  if (const char* env = std::getenv("BAYESQP_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::Avx2)) {
      return Backend::Avx2;
    }
    // "auto" and unknown values fall through to detection.
  }
  return backend_supported(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const detail::Kernels*>& active_kernels() {
  static std::atomic<const detail::Kernels*> kernels{
      resolve_initial() == Backend::Avx2 ? detail::avx2_kernels()
                                         : &detail::scalar_kernels()};
  return kernels;
}

}  // namespace

bool backend_supported(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return detail::avx2_kernels() != nullptr && cpu_has_avx2();
  }
  return false;
}

const char* backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

Backend active_backend() {
  return active_kernels().load(std::memory_order_relaxed) ==
                 &detail::scalar_kernels()
             ? Backend::Scalar
             : Backend::Avx2;
}

void force_backend(Backend backend) {
  const detail::Kernels* k = &detail::scalar_kernels();
  if (backend == Backend::Avx2 && backend_supported(Backend::Avx2)) {
    k = detail::avx2_kernels();
  }
  active_kernels().store(k, std::memory_order_relaxed);
}

void scaled_sqdist(const double* q, const double* X, const double* w, int d,
                   int n, double* out) {
  active_kernels().load(std::memory_order_relaxed)->scaled_sqdist(q, X, w, d,
                                                                  n, out);
}

void exp_inplace(double* x, int n) {
  active_kernels().load(std::memory_order_relaxed)->exp_inplace(x, n);
}

double weighted_cos_sum(const double* z, const double* w, int n) {
  return active_kernels().load(std::memory_order_relaxed)->weighted_cos_sum(
      z, w, n);
}

}  // namespace bayesqp::simd
