#include <atomic>
#include <cstdlib>
#include <cstring>

#include "surflow/kernels.hpp"

namespace surflow::kernels {

bool avx2_available() {
#if defined(SURFLOW_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {

Backend initial_backend() {
  const char* env = std::getenv("SURFACE_FLOW_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Backend::scalar;
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

Backend active_backend() { return current().load(std::memory_order_relaxed); }

Backend set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_available()) b = Backend::scalar;
  current().store(b, std::memory_order_relaxed);
  return b;
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

#ifdef SURFLOW_HAVE_AVX2
#define SURFLOW_DISPATCH(fn, ...) \
  return active_backend() == Backend::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define SURFLOW_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double dot(const double* x, const double* y, std::size_t n) { SURFLOW_DISPATCH(dot, x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { SURFLOW_DISPATCH(axpy, a, x, y, n); }
void scale(double a, double* x, std::size_t n) { SURFLOW_DISPATCH(scale, a, x, n); }
double nrm2(const double* x, std::size_t n) { SURFLOW_DISPATCH(nrm2, x, n); }
void spmv_rows(const CsrView& A, const double* x, double* y, std::size_t row_begin,
               std::size_t row_end) {
  SURFLOW_DISPATCH(spmv_rows, A, x, y, row_begin, row_end);
}

}  // namespace surflow::kernels
