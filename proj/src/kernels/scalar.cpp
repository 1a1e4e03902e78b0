#include <cmath>

#include "surflow/kernels.hpp"

namespace surflow::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double nrm2(const double* x, std::size_t n) { return std::sqrt(dot(x, x, n)); }

void spmv_rows(const CsrView& A, const double* x, double* y, std::size_t row_begin,
               std::size_t row_end) {
  for (std::size_t r = row_begin; r < row_end; ++r) {
    double s = 0.0;
    for (std::int64_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) s += A.val[k] * x[A.col[k]];
    y[r] = s;
  }
}

}  // namespace surflow::kernels::scalar
