#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "surflow/kernels.hpp"
#include "surflow/sparse.hpp"

using namespace surflow;
namespace k = surflow::kernels;

namespace {

CsrMatrix random_sparse(std::size_t n, unsigned seed) {
  const auto v = testing::random_vector(n * 7, seed);
  std::vector<std::int64_t> r;
  std::vector<std::int32_t> c;
  std::vector<double> val;
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < 7; ++j) {
      r.push_back(static_cast<std::int64_t>(i));
      c.push_back(static_cast<std::int32_t>((i * 31 + j * j * 17 + j) % n));
      val.push_back(v[i * 7 + j]);
    }
  return csr_from_triplets(n, n, r, c, val);
}

}  // namespace

TEST_CASE("scalar kernels on small inputs") {
  const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  CHECK(k::scalar::dot(x.data(), y.data(), 3) == 32.0);
  CHECK(k::scalar::nrm2(y.data(), 0) == 0.0);
  std::vector<double> z = y;
  k::scalar::axpy(2.0, x.data(), z.data(), 3);
  CHECK(z == std::vector<double>{6, 9, 12});
  k::scalar::scale(0.5, z.data(), 3);
  CHECK(z == std::vector<double>{3, 4.5, 6});
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  if (!k::avx2_available()) {
    MESSAGE("AVX2 not available; skipping");
    return;
  }
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 1000u, 4099u}) {
    const auto x = testing::random_vector(n, 1 + n), y = testing::random_vector(n, 2 + n);
    const double ds = k::scalar::dot(x.data(), y.data(), n), dv = k::avx2::dot(x.data(), y.data(), n);
    CHECK(std::abs(ds - dv) <= 1e-13 * (1.0 + std::abs(ds)));
    CHECK(k::avx2::nrm2(x.data(), n) == doctest::Approx(k::scalar::nrm2(x.data(), n)).epsilon(1e-14));
    std::vector<double> a = y, b = y;
    k::scalar::axpy(0.37, x.data(), a.data(), n);
    k::avx2::axpy(0.37, x.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
    k::scalar::scale(-1.25, a.data(), n);
    k::avx2::scale(-1.25, b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
  }
  const CsrMatrix A = random_sparse(513, 9);
  const auto x = testing::random_vector(513, 4);
  std::vector<double> ys(513), yv(513);
  k::scalar::spmv_rows(A.view(), x.data(), ys.data(), 0, 513);
  k::avx2::spmv_rows(A.view(), x.data(), yv.data(), 0, 513);
  for (std::size_t i = 0; i < 513; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-13));
}

TEST_CASE("backend selection") {
  const k::Backend before = k::active_backend();
  CHECK(k::set_backend(k::Backend::scalar) == k::Backend::scalar);
  CHECK(std::string(k::backend_name(k::active_backend())) == "scalar");
  const k::Backend got = k::set_backend(k::Backend::avx2);
  CHECK(got == (k::avx2_available() ? k::Backend::avx2 : k::Backend::scalar));
  k::set_backend(before);
}

TEST_CASE("CSR from triplets sums duplicates and sorts columns") {
  const CsrMatrix m = csr_from_triplets(2, 3, {1, 0, 1, 1}, {2, 1, 0, 2}, {1.0, 2.0, 3.0, 4.0});
  CHECK(m.nnz() == 3);
  CHECK(m.at(0, 1) == 2.0);
  CHECK(m.at(1, 0) == 3.0);
  CHECK(m.at(1, 2) == 5.0);
  CHECK(m.at(0, 0) == 0.0);
  CHECK(m.col[1] < m.col[2]);
  const auto y = m * std::vector<double>{1, 1, 1};
  CHECK(y == std::vector<double>{2.0, 8.0});
}

TEST_CASE("sparse multiply matches the dense product under both backends") {
  const CsrMatrix A = random_sparse(300, 3);
  const auto x = testing::random_vector(300, 8);
  const auto D = A.dense();
  std::vector<double> ref(300, 0.0);
  for (int i = 0; i < 300; ++i)
    for (int j = 0; j < 300; ++j) ref[i] += D[i * 300 + j] * x[j];
  const k::Backend before = k::active_backend();
  for (k::Backend b : {k::Backend::scalar, k::Backend::avx2}) {
    k::set_backend(b);
    const auto y = A * x;
    for (int i = 0; i < 300; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-13));
  }
  k::set_backend(before);
}

TEST_CASE("MatrixMarket round trip") {
  const auto d = testing::scratch_dir("mm");
  const CsrMatrix A = random_sparse(40, 5);
  write_matrix_market((d / "a.mtx").string(), A);
  const CsrMatrix B = read_matrix_market((d / "a.mtx").string());
  CHECK(B.rows == A.rows);
  CHECK(B.col == A.col);
  CHECK(B.row_ptr == A.row_ptr);
  CHECK(B.val == A.val);
}
