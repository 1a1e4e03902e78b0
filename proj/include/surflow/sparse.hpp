#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surflow/kernels.hpp"

namespace surflow {

/// Row-compressed sparse matrix. Column indices are sorted and unique within a row.
struct CsrMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
  kernels::CsrView view() const { return {row_ptr.data(), col.data(), val.data()}; }

  /// Entry (r, c), 0 if not stored.
  double at(std::size_t r, std::size_t c) const;

  /// y = A x (row-parallel).
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> operator*(const std::vector<double>& x) const;

  /// Dense row-major copy (small matrices only).
  std::vector<double> dense() const;
};

/// Builds a CSR matrix from unsorted triplets; duplicates are summed.
CsrMatrix csr_from_triplets(std::size_t rows, std::size_t cols,
                            std::vector<std::int64_t> r, std::vector<std::int32_t> c,
                            std::vector<double> v);

/// MatrixMarket coordinate real general, 1-based indices.
void write_matrix_market(const std::string& path, const CsrMatrix& m);
CsrMatrix read_matrix_market(const std::string& path);

}  // namespace surflow
