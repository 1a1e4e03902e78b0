#include "surflow/sparse.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "surflow/errors.hpp"
#include "surflow/parallel.hpp"

namespace surflow {

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto b = col.begin() + row_ptr[r], e = col.begin() + row_ptr[r + 1];
  const auto it = std::lower_bound(b, e, static_cast<std::int32_t>(c));
  return it != e && *it == static_cast<std::int32_t>(c) ? val[it - col.begin()] : 0.0;
}

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  if (x.size() != cols) throw ShapeMismatch("matrix-vector size mismatch");
  y.resize(rows);
  const kernels::CsrView v = view();
  parallel_for(rows, [&](std::size_t b, std::size_t e) { kernels::spmv_rows(v, x.data(), y.data(), b, e); });
}

std::vector<double> CsrMatrix::operator*(const std::vector<double>& x) const {
  std::vector<double> y;
  multiply(x, y);
  return y;
}

std::vector<double> CsrMatrix::dense() const {
  std::vector<double> d(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) d[r * cols + col[k]] = val[k];
  return d;
}

CsrMatrix csr_from_triplets(std::size_t rows, std::size_t cols, std::vector<std::int64_t> r,
                            std::vector<std::int32_t> c, std::vector<double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r[a] != r[b] ? r[a] < r[b] : c[a] < c[b];
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    if (!m.col.empty() && k > 0 && r[order[k - 1]] == r[i] && m.col.back() == c[i]) {
      m.val.back() += v[i];
      continue;
    }
    m.col.push_back(c[i]);
    m.val.push_back(v[i]);
    ++m.row_ptr[r[i] + 1];
  }
  for (std::size_t i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

void write_matrix_market(const std::string& path, const CsrMatrix& m) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows << ' ' << m.cols << ' ' << m.nnz() << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (auto k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
      out << r + 1 << ' ' << m.col[k] + 1 << ' ' << m.val[k] << '\n';
}

CsrMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket matrix coordinate real", 0) != 0)
    throw FormatError("unsupported MatrixMarket header in " + path);
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream head(line);
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (!(head >> rows >> cols >> nnz)) throw FormatError("bad MatrixMarket size line in " + path);
  std::vector<std::int64_t> r(nnz);
  std::vector<std::int32_t> c(nnz);
  std::vector<double> v(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!(in >> r[k] >> c[k] >> v[k])) throw FormatError("truncated MatrixMarket data in " + path);
    --r[k];
    --c[k];
  }
  return csr_from_triplets(rows, cols, std::move(r), std::move(c), std::move(v));
}

}  // namespace surflow
