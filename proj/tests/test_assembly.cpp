#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "surflow/errors.hpp"
#include "surflow/solver.hpp"

using namespace surflow;
using testing::Setup;

namespace {

// Dense Cholesky; false if a pivot is not positive.
bool cholesky_ok(std::vector<double> a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  return true;
}

double asymmetry(const CsrMatrix& m) {
  const auto d = m.dense();
  const std::size_t n = m.rows;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s = std::max(s, std::abs(d[i * n + j] - d[j * n + i]));
  return s;
}

Setup flat(int nt, int n1, int n2, const Weights& w, SpatialBoundary b = SpatialBoundary::dirichlet_zero,
           bool wrap = false) {
  const SurfaceGrid s = make_surface(testing::plane_spec(nt, n1, n2, 1.0, wrap, wrap));
  return testing::make_setup(s, testing::moving_pattern(s.shape, 0.4, -0.3), w, BoundarySpec{b});
}

Setup moving_torus(int nt, int n1, int n2, const Weights& w, bool time_connection = true,
                   TraceConvention conv = TraceConvention::lemma) {
  AnalyticSurfaceSpec spec = testing::torus_spec(nt, n1, n2, 0.5);
  spec.torus.rotation_wobble = 0.3;
  const SurfaceGrid s = make_surface(spec);
  return testing::make_setup(s, testing::moving_pattern(s.shape, 0.2, 0.1), w,
                             BoundarySpec{SpatialBoundary::periodic_both, time_connection}, true, conv);
}

}  // namespace

TEST_CASE("boundary and convention names round-trip") {
  for (SpatialBoundary b : {SpatialBoundary::dirichlet_zero, SpatialBoundary::neumann, SpatialBoundary::periodic_x1,
                            SpatialBoundary::periodic_x2, SpatialBoundary::periodic_both})
    CHECK(parse_spatial_boundary(spatial_boundary_name(b)) == b);
  CHECK(parse_spatial_boundary("dirichlet") == SpatialBoundary::dirichlet_zero);
  CHECK(parse_trace_convention("theorem") == TraceConvention::theorem);
  CHECK_THROWS_AS(parse_spatial_boundary("robin"), InvalidConfig);
}

TEST_CASE("flat static coefficients reduce to the Euclidean system") {
  const Weights w{1.0, 0.05, 2.0};
  const Setup s = flat(3, 5, 5, w);
  for (std::size_t p = 0; p < s.surface.shape.size(); ++p) {
    const double It = s.imd.dIt[p], I1 = s.imd.dI1[p], I2 = s.imd.dI2[p];
    const double I[2] = {I1, I2};
    const CoefficientFields& c = s.coeffs;
    for (int j = 0; j < 2; ++j) {
      CHECK(c.A[p][j] == doctest::Approx(It * I[j]));
      for (int m = 0; m < 2; ++m) CHECK(c.B[p](j, m) == doctest::Approx(I[j] * I[m] + (j == m ? w.beta : 0.0)));
    }
    for (const Mat2& Cm : c.C[p])
      for (double v : Cm.v) CHECK(v == 0.0);
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < 3; ++m) CHECK(c.D[p](l, m) == (l == m ? -w.gamma : 0.0));
  }
}

TEST_CASE("D00 is -gamma / alpha^2 everywhere") {
  const Weights w{2.5, 0.0, 1.5};
  const Setup s = moving_torus(4, 12, 10, w);
  for (const Mat3& D : s.coeffs.D) CHECK(D(0, 0) == doctest::Approx(-1.5 / 6.25));
}

TEST_CASE("constant image gives A = 0 and B = beta") {
  const SurfaceGrid surf = make_surface(testing::plane_spec(3, 5, 5));
  const Setup s = testing::make_setup(surf, testing::constant_image(surf.shape, 0.4), Weights{1, 0.3, 1},
                                      BoundarySpec{});
  for (std::size_t p = 0; p < surf.shape.size(); ++p) {
    CHECK(s.coeffs.A[p] == Vec2{});
    CHECK(s.coeffs.B[p].v == (Mat2::identity() * 0.3).v);
  }
  for (double r : s.system.rhs) CHECK(r == 0.0);
  const SolveResult res = gmres_solve(s.system, SolverConfig{});
  CHECK(res.report.converged);
  for (double x : res.x) CHECK(x == 0.0);
}

TEST_CASE("flat static Dirichlet system is symmetric positive definite") {
  const Setup s = flat(3, 5, 5, Weights{1.0, 0.1, 1.0});
  CHECK(asymmetry(s.system.matrix) <= 1e-12);
  CHECK(cholesky_ok(s.system.matrix.dense(), s.system.unknowns()));
}

TEST_CASE("row kinds and Dirichlet identity rows") {
  const Setup s = flat(3, 3, 3, Weights{1.0, 0.1, 1.0});
  std::size_t non_dirichlet_rows = 0;
  for (std::size_t p = 0; p < s.system.kind.size(); ++p) {
    const RowKind k = s.system.kind[p];
    if (k != RowKind::dirichlet) non_dirichlet_rows += 2;
    const GridPoint gp = grid_point(s.surface.shape, p);
    if (gp.i1 == 1 && gp.i2 == 1)
      CHECK(k == (gp.t == 1 ? RowKind::interior : RowKind::time_boundary));
    if (k == RowKind::dirichlet)
      for (int c = 0; c < 2; ++c) {
        const std::size_t r = 2 * p + c;
        CHECK(s.system.matrix.row_ptr[r + 1] - s.system.matrix.row_ptr[r] == 1);
        CHECK(s.system.matrix.at(r, r) == 1.0);
        CHECK(s.system.rhs[r] == 0.0);
      }
  }
  CHECK(non_dirichlet_rows == 2 * 3);
}

TEST_CASE("Dirichlet columns are eliminated") {
  const Setup s = flat(4, 5, 6, Weights{1.0, 0.1, 1.0});
  const CsrMatrix& m = s.system.matrix;
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (s.system.kind[r / 2] == RowKind::dirichlet) continue;
    for (auto e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) CHECK(s.system.kind[m.col[e] / 2] != RowKind::dirichlet);
  }
}

TEST_CASE("grid and periodicity errors") {
  const SurfaceGrid two = make_surface(testing::plane_spec(3, 2, 5));
  const GeometryField geom = build_geometry(two, 1.0);
  const FrameField fr = orthonormal_frame(geom);
  const ChristoffelField ch = christoffel_symbols(geom, two);
  const ConnectionField co = connection_coefficients(fr, ch, geom);
  ImageDerivatives zero{std::vector<double>(two.shape.size()), std::vector<double>(two.shape.size()),
                        std::vector<double>(two.shape.size())};
  const CoefficientFields cf = pde_coefficients(geom, fr, ch, co, zero, Weights{});
  CHECK_THROWS_AS(assemble_system(cf, BoundarySpec{}, fr, co, geom), GridTooSmall);

  const Setup s = flat(3, 5, 5, Weights{1, 0.1, 1}, SpatialBoundary::dirichlet_zero, false);
  CHECK_THROWS_AS(assemble_system(s.coeffs, BoundarySpec{SpatialBoundary::periodic_both}, s.frame, s.conn, s.geom),
                  InconsistentPeriodicity);
  CHECK_THROWS_AS(pde_coefficients(s.geom, s.frame, s.chris, s.conn, s.imd, Weights{2.0, 0.0, 1.0}), InvalidConfig);
}

TEST_CASE("Neumann rows annihilate constant fields on a flat static plane") {
  const SurfaceGrid surf = make_surface(testing::plane_spec(4, 6, 5));
  const Setup s = testing::make_setup(surf, testing::constant_image(surf.shape, 0.2), Weights{1, 0, 1},
                                      BoundarySpec{SpatialBoundary::neumann});
  std::vector<double> x(s.system.unknowns());
  for (std::size_t p = 0; p < x.size() / 2; ++p) {
    x[2 * p] = 0.7;
    x[2 * p + 1] = -1.3;
  }
  for (double v : s.system.matrix * x) CHECK(std::abs(v) < 1e-12);
  std::size_t neumann = 0;
  for (RowKind k : s.system.kind) neumann += k == RowKind::spatial_neumann;
  CHECK(neumann == 4 * (2 * 6 + 2 * 5 - 4));
}

TEST_CASE("outward normals on the flat plane") {
  const SurfaceGrid surf = make_surface(testing::plane_spec(3, 4, 4));
  const GeometryField geom = build_geometry(surf, 1.0);
  const GridShape& g = surf.shape;
  const Vec2 left = outward_normal(geom, {1, 0, 2}, g.index(1, 0, 2));
  CHECK(left == Vec2{{-1.0, 0.0}});
  const Vec2 corner = outward_normal(geom, {1, 3, 3}, g.index(1, 3, 3));
  CHECK(corner[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(corner[1] == doctest::Approx(std::sqrt(0.5)));
  const Vec2 inside = outward_normal(geom, {1, 1, 1}, g.index(1, 1, 1));
  CHECK(inside == Vec2{});
}

TEST_CASE("trace convention only matters on time-dependent metrics") {
  const Weights w{1, 0.1, 1};
  const Setup a = flat(3, 5, 5, w);
  const CoefficientFields th = pde_coefficients(a.geom, a.frame, a.chris, a.conn, a.imd, w, TraceConvention::theorem);
  for (std::size_t p = 0; p < th.B.size(); ++p) CHECK(th.B[p].v == a.coeffs.B[p].v);

  AnalyticSurfaceSpec spec = testing::plane_spec(4, 5, 5, 0.5);
  spec.plane.scale_rate = 1.0;
  const SurfaceGrid surf = make_surface(spec);
  const Setup b = testing::make_setup(surf, testing::moving_pattern(surf.shape, 0.1, 0.1), w, BoundarySpec{});
  const CoefficientFields th2 = pde_coefficients(b.geom, b.frame, b.chris, b.conn, b.imd, w, TraceConvention::theorem);
  double diff = 0.0;
  for (std::size_t p = 0; p < th2.C.size(); ++p) diff = std::max(diff, std::abs(th2.C[p][0](0, 0) - b.coeffs.C[p][0](0, 0)));
  CHECK(diff > 0.1);
}

TEST_CASE("time connection switch changes only time-boundary rows") {
  const Weights w{1, 0.01, 1};
  const Setup on = moving_torus(4, 12, 10, w, true);
  const Setup off = moving_torus(4, 12, 10, w, false);
  const CsrMatrix &a = on.system.matrix, &b = off.system.matrix;
  bool boundary_differs = false;
  const auto A = a.dense(), B = b.dense();
  const std::size_t n = a.rows;
  for (std::size_t r = 0; r < n; ++r) {
    const bool tb = on.system.kind[r / 2] == RowKind::time_boundary;
    for (std::size_t c = 0; c < n; ++c) {
      if (!tb) CHECK(A[r * n + c] == B[r * n + c]);
      else if (A[r * n + c] != B[r * n + c]) boundary_differs = true;
    }
  }
  CHECK(boundary_differs);
}

TEST_CASE("assembly is deterministic across thread counts") {
  const Weights w{1, 0.01, 1};
  const Setup a = moving_torus(4, 16, 12, w);
  setenv("SURFACE_FLOW_THREADS", "3", 1);
  const Setup b = moving_torus(4, 16, 12, w);
  unsetenv("SURFACE_FLOW_THREADS");
  CHECK(a.system.matrix.val == b.system.matrix.val);
  CHECK(a.system.matrix.col == b.system.matrix.col);
  CHECK(a.system.rhs == b.system.rhs);
}
