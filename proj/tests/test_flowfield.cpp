#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "surflow/errors.hpp"

using namespace surflow;

namespace {

testing::Setup flat_moving(int nt, int n1, int n2, double h, const Weights& w) {
  const SurfaceGrid s = make_surface(testing::plane_spec(nt, n1, n2, h));
  return testing::make_setup(s, testing::moving_pattern(s.shape, 0.6, -0.3), w, BoundarySpec{});
}

// Spatio-temporal Horn-Schunck energy on a static flat grid, written out with
// plain loops: forward differences, backward at the last node.
double flat_energy(const testing::Setup& s, const std::vector<Vec2>& u) {
  const GridShape& g = s.surface.shape;
  const Weights& w = s.weights;
  auto fwd = [&](Axis ax, const GridPoint& gp, int c) {
    const int n = g.extent(ax), i = gp.along(ax);
    GridPoint a = gp, b = gp;
    if (i + 1 < n)
      b = gp.with(ax, i + 1);
    else
      a = gp.with(ax, i - 1);
    return (u[g.index(b.t, b.i1, b.i2)][c] - u[g.index(a.t, a.i1, a.i2)][c]) / g.step(ax);
  };
  double e = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const GridPoint gp = grid_point(g, p);
    const double r = s.imd.dIt[p] + s.imd.dI1[p] * u[p][0] + s.imd.dI2[p] * u[p][1];
    double reg = w.beta * (u[p][0] * u[p][0] + u[p][1] * u[p][1]);
    for (int c = 0; c < 2; ++c) {
      const double dt = fwd(Axis::t, gp, c) / w.alpha, d1 = fwd(Axis::x1, gp, c), d2 = fwd(Axis::x2, gp, c);
      reg += w.gamma * (dt * dt + d1 * d1 + d2 * d2);
    }
    e += w.alpha * g.ht * g.h1 * g.h2 * (r * r + reg);
  }
  return e;
}

}  // namespace

TEST_CASE("expand_views on the flat plane and the torus") {
  const testing::Setup flat = flat_moving(3, 4, 5, 1.0, Weights{});
  const auto u = testing::random_flow(flat.surface.f.size(), 3);
  const FlowField ff = expand_views(u, flat.frame, flat.surface);
  for (std::size_t p = 0; p < u.size(); ++p) {
    CHECK(ff.u_coord[p] == u[p]);
    CHECK(ff.u_ambient[p] == Vec3{u[p][0], u[p][1], 0.0});
  }

  const SurfaceGrid torus = make_surface(testing::torus_spec(3, 16, 12));
  const GeometryField geom = build_geometry(torus, 1.0);
  const FrameField frame = orthonormal_frame(geom);
  std::vector<Vec2> e1(torus.f.size(), Vec2{{1.0, 0.0}});
  const FlowField ft = expand_views(e1, frame, torus);
  CHECK(ft.u_coord[0][0] == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(ft.u_coord[0][1]) < 1e-14);
  CHECK(norm(ft.u_ambient[0] - Vec3{0.0, 1.0, 0.0}) < 1e-12);

  const FlowField z = expand_views(std::vector<Vec2>(torus.f.size()), frame, torus);
  for (std::size_t p = 0; p < z.u_ambient.size(); ++p) {
    CHECK(z.u_coord[p] == Vec2{});
    CHECK(z.u_ambient[p] == Vec3{});
  }
  CHECK_THROWS_AS(expand_views(std::vector<Vec2>(5), frame, torus), ShapeMismatch);
}

TEST_CASE("frame, coordinate and ambient norms agree") {
  AnalyticSurfaceSpec spec = testing::torus_spec(4, 16, 12, 0.2);
  spec.torus.rotation_speed = 0.2;
  const SurfaceGrid s = make_surface(spec);
  const GeometryField geom = build_geometry(s, 1.5);
  const FrameField frame = orthonormal_frame(geom);
  const auto u = testing::random_flow(s.f.size(), 11);
  const FlowField ff = expand_views(u, frame, s);
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double nf = u[p][0] * u[p][0] + u[p][1] * u[p][1];
    const Vec2& c = ff.u_coord[p];
    const Mat2& g = geom.g[p];
    const double nc = g(0, 0) * c[0] * c[0] + 2.0 * g(0, 1) * c[0] * c[1] + g(1, 1) * c[1] * c[1];
    CHECK(std::abs(nf - nc) <= 1e-10);
    CHECK(std::abs(nf - dot(ff.u_ambient[p], ff.u_ambient[p])) <= 1e-10);
  }
}

TEST_CASE("energy of the zero flow is the data term of the image") {
  const testing::Setup s = flat_moving(4, 8, 7, 1.0, Weights{1.0, 0.2, 1.0});
  const auto pb = s.energy_problem();
  const std::vector<Vec2> zero(s.surface.f.size());
  const EnergyBreakdown e = discrete_energy(expand_views(zero, s.frame, s.surface), s.imd, s.geom,
                                            s.frame, s.conn, s.weights);
  CHECK(e.R == 0.0);
  double data = 0.0;
  for (std::size_t p = 0; p < zero.size(); ++p) data += s.imd.dIt[p] * s.imd.dIt[p];
  CHECK(e.S == doctest::Approx(data).epsilon(1e-13));
  CHECK(e.E == e.S);
  CHECK(energy_of(pb, zero) == e.E);

  const SurfaceGrid g = make_surface(testing::plane_spec(3, 5, 5));
  const testing::Setup c = testing::make_setup(g, testing::constant_image(g.shape, 0.4), Weights{}, BoundarySpec{});
  CHECK(energy_of(c.energy_problem(), std::vector<Vec2>(g.f.size())) == 0.0);
}

TEST_CASE("flat static energy matches the Horn-Schunck energy") {
  for (const Weights w : {Weights{1.0, 0.0, 1.0}, Weights{2.0, 0.3, 0.7}}) {
    const testing::Setup s = flat_moving(4, 7, 6, 0.5, w);
    const auto u = testing::random_flow(s.surface.f.size(), 5);
    const double ref = flat_energy(s, u);
    CHECK(std::abs(energy_of(s.energy_problem(), u) - ref) <= 1e-12 * ref);
  }
}

TEST_CASE("energy is quadratic without image data") {
  AnalyticSurfaceSpec spec = testing::torus_spec(4, 12, 10, 0.3);
  spec.torus.rotation_speed = 0.2;
  const SurfaceGrid surf = make_surface(spec);
  const testing::Setup s = testing::make_setup(surf, testing::constant_image(surf.shape, 0.0),
                                               Weights{1.0, 0.1, 1.0}, BoundarySpec{SpatialBoundary::periodic_both});
  const auto u = testing::random_flow(surf.f.size(), 2);
  const double e = energy_of(s.energy_problem(), u);
  CHECK(e > 0.0);
  for (double sc : {-1.0, 0.5, 3.0}) {
    std::vector<Vec2> v(u.size());
    for (std::size_t p = 0; p < u.size(); ++p) v[p] = u[p] * sc;
    CHECK(energy_of(s.energy_problem(), v) == doctest::Approx(sc * sc * e).epsilon(1e-12));
  }
}

TEST_CASE("operator residual is the energy gradient on a flat static grid") {
  const testing::Setup s = flat_moving(6, 10, 9, 1.0, Weights{1.0, 0.05, 1.0});
  const GridShape& g = s.surface.shape;
  const auto u = testing::random_flow(g.size(), 21);
  auto du = testing::random_flow(g.size(), 22);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const GridPoint gp = grid_point(g, p);
    bool inner = true;
    for (Axis ax : kAxes) inner = inner && gp.along(ax) >= 2 && gp.along(ax) <= g.extent(ax) - 3;
    if (!inner) du[p] = Vec2{};
  }
  for (const GradientGap& gap : gradient_consistency_check(s.energy_problem(), u, du)) {
    CHECK(gap.operator_value != 0.0);
    CHECK(gap.relative_gap <= 1e-6);
  }
  for (const GradientGap& gap :
       gradient_consistency_check(s.energy_problem(), u, std::vector<Vec2>(g.size()))) {
    CHECK(gap.relative_gap == 0.0);
    CHECK(gap.directional_fd == 0.0);
  }
}

TEST_CASE("angular error examples") {
  const double th = M_PI / 5.0;
  const Vec2 a{{1.0, 0.0}}, b{{std::cos(th), std::sin(th)}};
  CHECK(std::abs(angular_error(a, b) - 0.4397) <= 5e-3);
  CHECK(angular_error(a, b) == doctest::Approx(std::acos((1.0 + std::cos(th)) / 2.0)));
  CHECK(angular_error(Vec2{{1.0, 0.0}}, Vec2{{0.0, 1.0}}) == doctest::Approx(M_PI / 3.0));
  CHECK(angular_error(b, b) == 0.0);
  const auto u = testing::random_flow(500, 1), v = testing::random_flow(500, 2);
  const auto e = angular_error(u, v), f = angular_error(v, u);
  for (std::size_t p = 0; p < e.size(); ++p) {
    CHECK(e[p] == f[p]);
    CHECK(e[p] >= 0.0);
    CHECK(e[p] <= M_PI);
  }
  const Vec2 big{{1e8, 1e8}};
  CHECK(angular_error(big, big) == 0.0);
  CHECK(angular_error(Vec3{1, 2, 3}, Vec3{1, 2, 3}) == 0.0);
  // small angles keep their relative accuracy
  CHECK(angular_error(Vec2{}, Vec2{{1e-9, 0.0}}) == doctest::Approx(1e-9).epsilon(1e-12));
  CHECK_THROWS_AS(angular_error(u, std::vector<Vec2>(3)), ShapeMismatch);
}

TEST_CASE("endpoint error and the ambient view on the flat plane") {
  CHECK(endpoint_error(std::vector<Vec2>{Vec2{{3.0, 4.0}}}, std::vector<Vec2>{Vec2{}})[0] == 5.0);
  CHECK(endpoint_error(std::vector<Vec3>{Vec3{1.0, 2.0, 2.0}}, std::vector<Vec3>{Vec3{}})[0] == 3.0);
  CHECK_THROWS_AS(endpoint_error(std::vector<Vec2>(2), std::vector<Vec2>(3)), ShapeMismatch);

  const testing::Setup s = flat_moving(3, 5, 6, 1.0, Weights{});
  const auto u = testing::random_flow(s.surface.f.size(), 8), v = testing::random_flow(s.surface.f.size(), 9);
  const FlowField fu = expand_views(u, s.frame, s.surface), fv = expand_views(v, s.frame, s.surface);
  CHECK(angular_error(fu.u_ambient, fv.u_ambient) == angular_error(fu.u_coord, fv.u_coord));
  CHECK(endpoint_error(fu.u_ambient, fv.u_ambient) == endpoint_error(fu.u_coord, fv.u_coord));
}
