#pragma once

#include <cstddef>
#include <cstdint>

namespace surflow::kernels {

enum class Backend { scalar, avx2 };

/// True if this build contains the AVX2 variants and the CPU supports AVX2+FMA.
bool avx2_available();

/// Backend used by the dispatching entry points. Chosen once at startup:
/// AVX2 when available unless SURFACE_FLOW_SIMD=scalar is set.
Backend active_backend();

/// Overrides the dispatch choice (tests, benchmarks). Requesting avx2 on a
/// machine without it falls back to scalar; returns the backend in effect.
Backend set_backend(Backend b);

const char* backend_name(Backend b);

/// Borrowed CSR arrays (row offsets, column indices, values).
struct CsrView {
  const std::int64_t* row_ptr;
  const std::int32_t* col;
  const double* val;
};

double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);  // y += a x
void scale(double a, double* x, std::size_t n);                   // x *= a
double nrm2(const double* x, std::size_t n);
void spmv_rows(const CsrView& A, const double* x, double* y, std::size_t row_begin,
               std::size_t row_end);

// Reference implementations. Reductions run left to right in one accumulator.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
double nrm2(const double* x, std::size_t n);
void spmv_rows(const CsrView& A, const double* x, double* y, std::size_t row_begin,
               std::size_t row_end);
}  // namespace scalar

// AVX2/FMA variants; callable only when avx2_available() is true.
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
double nrm2(const double* x, std::size_t n);
void spmv_rows(const CsrView& A, const double* x, double* y, std::size_t row_begin,
               std::size_t row_end);
}  // namespace avx2

}  // namespace surflow::kernels
