#include <cmath>
#include <vector>

#include "doctest.h"
#include "surflow/grid.hpp"
#include "surflow/parallel.hpp"

using namespace surflow;

namespace {

double apply1d(const Stencil& st, const std::vector<double>& f) {
  double acc = 0.0;
  for (int k = 0; k < st.count; ++k) acc += st.weight[k] * f[st.index[k]];
  return acc;
}

}  // namespace

TEST_CASE("grid indexing round-trips") {
  GridShape s{3, 4, 5};
  for (std::size_t p = 0; p < s.size(); ++p) CHECK(linear_index(s, grid_point(s, p)) == p);
  CHECK(s.index(2, 3, 4) == s.size() - 1);
}

TEST_CASE("first and second differences are exact for quadratics") {
  const int n = 7;
  const double h = 0.5;
  std::vector<double> f(n), df(n), d2f(n);
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    f[i] = 3.0 * x * x - 2.0 * x + 1.0;
    df[i] = 6.0 * x - 2.0;
    d2f[i] = 6.0;
  }
  for (int i = 0; i < n; ++i) {
    CHECK(apply1d(first_difference(n, i, false, h), f) == doctest::Approx(df[i]).epsilon(1e-12));
    CHECK(apply1d(second_difference(n, i, false, h), f) == doctest::Approx(d2f[i]).epsilon(1e-12));
  }
}

TEST_CASE("three-point one-sided second difference on a three-node axis") {
  std::vector<double> f{1.0, 4.0, 9.0};  // (i + 1)^2
  for (int i = 0; i < 3; ++i) CHECK(apply1d(second_difference(3, i, false, 1.0), f) == doctest::Approx(2.0));
}

TEST_CASE("periodic differences wrap around") {
  const int n = 16;
  const double h = 2.0 * M_PI / n;
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::sin(i * h);
  const Stencil st = first_difference(n, 0, true, h);
  CHECK(st.count == 2);
  CHECK(apply1d(st, f) == doctest::Approx(std::sin(h) / h).epsilon(1e-12));
  CHECK(apply1d(second_difference(n, n - 1, true, h), f) ==
        doctest::Approx((f[0] - 2 * f[n - 1] + f[n - 2]) / (h * h)));
}

TEST_CASE("forward difference switches to backward at the last node") {
  std::vector<double> f{0.0, 1.0, 4.0};
  CHECK(apply1d(forward_difference(3, 0, false, 1.0), f) == doctest::Approx(1.0));
  CHECK(apply1d(forward_difference(3, 2, false, 1.0), f) == doctest::Approx(3.0));
  CHECK(apply1d(forward_difference(3, 2, true, 1.0), f) == doctest::Approx(-4.0));
}

TEST_CASE("single-sample axes have a zero derivative") {
  CHECK(first_difference(1, 0, false, 1.0).count == 0);
  CHECK(second_difference(1, 0, false, 1.0).count == 0);
}

TEST_CASE("refinement of the boundary stencil is second order") {
  auto err = [](int n) {
    const double h = 1.0 / (n - 1);
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = std::exp(i * h);
    return std::abs(apply1d(first_difference(n, 0, false, h), f) - 1.0);
  };
  const double r = err(11) / err(21);
  CHECK(r > 3.0);
  CHECK(r < 5.0);
}

TEST_CASE("parallel_for covers the range exactly once") {
  std::vector<int> hits(10007, 0);
  parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  }, 16);
  for (int h : hits) CHECK(h == 1);
}
