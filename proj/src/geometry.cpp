#include "surflow/geometry.hpp"

#include <cmath>
#include <sstream>

#include "surflow/errors.hpp"
#include "surflow/parallel.hpp"

namespace surflow {

void SurfaceGrid::resize(const GridShape& s) {
  shape = s;
  const auto n = s.size();
  for (auto* v : {&f, &ft, &f1, &f2, &f11, &f12, &f22}) v->assign(n, Vec3{});
}

void SurfaceGrid::validate() const {
  if (shape.nt < 1 || shape.n1 < 1 || shape.n2 < 1)
    throw InvalidSpec("surface grid has an empty axis");
  if (!(shape.ht > 0.0 && shape.h1 > 0.0 && shape.h2 > 0.0))
    throw InvalidSpec("surface grid step sizes must be positive");
  const auto n = shape.size();
  for (const auto* v : {&f, &ft, &f1, &f2, &f11, &f12, &f22})
    if (v->size() != n) throw InvalidSpec("surface arrays do not match the grid shape");
}

void recompute_derivatives(SurfaceGrid& s) {
  const GridShape& sh = s.shape;
  const auto n = sh.size();
  s.ft.assign(n, {});
  s.f1.assign(n, {});
  s.f2.assign(n, {});
  s.f11.assign(n, {});
  s.f12.assign(n, {});
  s.f22.assign(n, {});
  for (std::size_t p = 0; p < n; ++p) {
    const GridPoint gp = grid_point(sh, p);
    s.ft[p] = axis_derivative(s.f, sh, Axis::t, gp);
    s.f1[p] = axis_derivative(s.f, sh, Axis::x1, gp);
    s.f2[p] = axis_derivative(s.f, sh, Axis::x2, gp);
    s.f11[p] = axis_second_derivative(s.f, sh, Axis::x1, gp);
    s.f22[p] = axis_second_derivative(s.f, sh, Axis::x2, gp);
  }
  for (std::size_t p = 0; p < n; ++p)
    s.f12[p] = axis_derivative(s.f1, sh, Axis::x2, grid_point(sh, p));
}

namespace {

std::string where(const GridShape& s, std::size_t p) {
  const GridPoint gp = grid_point(s, p);
  std::ostringstream os;
  os << "(t=" << gp.t << ", i1=" << gp.i1 << ", i2=" << gp.i2 << ")";
  return os.str();
}

// d_k g_ij = <d_ik f, d_j f> + <d_i f, d_jk f>, with d_i f in {f1, f2}.
Mat2 metric_partial(const Vec3& f1, const Vec3& f2, const Vec3& d1, const Vec3& d2) {
  // d1 = d_k d_1 f, d2 = d_k d_2 f
  Mat2 m;
  m(0, 0) = 2.0 * dot(d1, f1);
  m(1, 1) = 2.0 * dot(d2, f2);
  m(0, 1) = dot(d1, f2) + dot(f1, d2);
  m(1, 0) = m(0, 1);
  return m;
}

Mat2 frame_derivative(const Mat2& g, const Mat2& dg) {
  const double g11 = g(0, 0), g12 = g(0, 1);
  const double n2 = g(1, 1) - g12 * g12 / g11;
  const double n = std::sqrt(n2);
  const double dn2 = dg(1, 1) - 2.0 * g12 * dg(0, 1) / g11 + g12 * g12 * dg(0, 0) / (g11 * g11);
  const double dn = dn2 / (2.0 * n);
  Mat2 d;
  d(0, 0) = -0.5 * dg(0, 0) / (g11 * std::sqrt(g11));
  d(0, 1) = 0.0;
  d(1, 0) = -(dg(0, 1) / (g11 * n) - g12 * dg(0, 0) / (g11 * g11 * n) - g12 * dn / (g11 * n * n));
  d(1, 1) = -dn / n2;
  return d;
}

}  // namespace

GeometryField build_geometry(const SurfaceGrid& surface, double alpha) {
  surface.validate();
  if (!(alpha > 0.0)) throw InvalidConfig("alpha must be positive");
  const GridShape& sh = surface.shape;
  const auto n = sh.size();

  GeometryField geom;
  geom.shape = sh;
  geom.alpha = alpha;
  geom.g.resize(n);
  geom.ginv.resize(n);
  geom.vol.resize(n);
  geom.dtg.resize(n);
  geom.dg1.resize(n);
  geom.dg2.resize(n);

  for (std::size_t p = 0; p < n; ++p) {
    const Vec3& a = surface.f1[p];
    const Vec3& b = surface.f2[p];
    Mat2 g;
    g(0, 0) = dot(a, a);
    g(0, 1) = dot(a, b);
    g(1, 0) = g(0, 1);
    g(1, 1) = dot(b, b);
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1);
    if (!(det > kDegenerateMetricEps))
      throw DegenerateMetric("degenerate metric (det g = " + std::to_string(det) + ") at " +
                             where(sh, p));
    geom.g[p] = g;
    geom.ginv[p] = Mat2{{g(1, 1) / det, -g(0, 1) / det, -g(0, 1) / det, g(0, 0) / det}};
    geom.vol[p] = std::sqrt(det);
    geom.dg1[p] = metric_partial(a, b, surface.f11[p], surface.f12[p]);
    geom.dg2[p] = metric_partial(a, b, surface.f12[p], surface.f22[p]);
  }

  // d_t d_i f from the stored spatial derivatives by differences in time.
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GridPoint gp = grid_point(sh, p);
      const Vec3 dt1 = axis_derivative(surface.f1, sh, Axis::t, gp);
      const Vec3 dt2 = axis_derivative(surface.f2, sh, Axis::t, gp);
      geom.dtg[p] = metric_partial(surface.f1[p], surface.f2[p], dt1, dt2);
    }
  });
  return geom;
}

Mat2 gram_schmidt_frame(const Mat2& g) {
  const double g11 = g(0, 0), g12 = g(0, 1);
  const double n = std::sqrt(g(1, 1) - g12 * g12 / g11);
  Mat2 a;
  a(0, 0) = 1.0 / std::sqrt(g11);
  a(0, 1) = 0.0;
  a(1, 0) = -(g12 / g11) / n;
  a(1, 1) = 1.0 / n;
  return a;
}

Mat3 FrameField::extended(std::size_t p) const {
  Mat3 m;
  m(0, 0) = 1.0 / alpha;
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 2; ++l) m(i + 1, l + 1) = a[p](i, l);
  return m;
}

FrameField orthonormal_frame(const GeometryField& geom) {
  const auto n = geom.shape.size();
  FrameField fr;
  fr.shape = geom.shape;
  fr.alpha = geom.alpha;
  fr.a.resize(n);
  fr.b.resize(n);
  for (auto& d : fr.da) d.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const Mat2& g = geom.g[p];
    if (!(g.det() > kDegenerateMetricEps))
      throw DegenerateMetric("degenerate metric at " + where(geom.shape, p));
    const Mat2 a = gram_schmidt_frame(g);
    fr.a[p] = a;
    // a is lower triangular.
    Mat2 b;
    b(0, 0) = 1.0 / a(0, 0);
    b(0, 1) = 0.0;
    b(1, 0) = -a(1, 0) / (a(0, 0) * a(1, 1));
    b(1, 1) = 1.0 / a(1, 1);
    fr.b[p] = b;
    for (Axis ax : kAxes)
      fr.da[static_cast<int>(ax)][p] = frame_derivative(g, geom.metric_partial(ax, p));
  }
  return fr;
}

Mat3 product_metric(const GeometryField& geom, std::size_t p) {
  Mat3 m;
  m(0, 0) = geom.alpha * geom.alpha;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i + 1, j + 1) = geom.g[p](i, j);
  return m;
}

ChristoffelField christoffel_symbols(const GeometryField& geom, const SurfaceGrid& surface) {
  if (!geom.shape.same_layout(surface.shape) || geom.g.size() != surface.shape.size())
    throw ShapeMismatch("geometry and surface grids differ");
  const auto n = geom.shape.size();
  ChristoffelField ch;
  ch.shape = geom.shape;
  ch.gamma.resize(n);
  const double alpha2 = geom.alpha * geom.alpha;

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      // dg(m, k, l) = d_l gbar_{mk}; the time-time entry is constant.
      Tensor3 dg;
      for (Axis ax : kAxes) {
        const int l = static_cast<int>(ax);
        const Mat2& d = geom.metric_partial(ax, p);
        for (int m = 0; m < 2; ++m)
          for (int k = 0; k < 2; ++k) dg(m + 1, k + 1, l) = d(m, k);
      }
      Mat3 ginv;
      ginv(0, 0) = 1.0 / alpha2;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) ginv(i + 1, j + 1) = geom.ginv[p](i, j);

      Tensor3& G = ch.gamma[p];
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
          for (int l = k; l < 3; ++l) {
            double s = 0.0;
            for (int m = 0; m < 3; ++m)
              s += ginv(i, m) * (dg(m, k, l) + dg(m, l, k) - dg(k, l, m));
            G(i, k, l) = 0.5 * s;
            G(i, l, k) = G(i, k, l);
          }
    }
  });
  return ch;
}

ConnectionField connection_coefficients(const FrameField& frame, const ChristoffelField& chris,
                                        const GeometryField& geom, FrameDerivative mode) {
  if (!frame.shape.same_layout(chris.shape) || !frame.shape.same_layout(geom.shape))
    throw ShapeMismatch("frame, Christoffel and geometry grids differ");
  const GridShape& sh = geom.shape;
  const auto n = sh.size();
  ConnectionField conn;
  conn.shape = sh;
  conn.omega.resize(n);

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GridPoint gp = grid_point(sh, p);
      const Mat3 A = frame.extended(p);
      const Mat3 gbar = product_metric(geom, p);
      const Tensor3& G = chris.gamma[p];

      // dA[l](k, m) = d_l abar^m_k; the time row of abar is constant.
      std::array<Mat3, 3> dA{};
      for (Axis ax : kAxes) {
        const int l = static_cast<int>(ax);
        const Mat2 d = mode == FrameDerivative::chain_rule
                           ? frame.da[l][p]
                           : axis_derivative(frame.a, sh, ax, gp);
        for (int k = 0; k < 2; ++k)
          for (int m = 0; m < 2; ++m) dA[l](k + 1, m + 1) = d(k, m);
      }

      // T(m, i, k) = abar^l_i d_l abar^m_k + abar^l_i abar^n_k Gamma^m_{ln}
      Tensor3 T;
      for (int m = 0; m < 3; ++m)
        for (int i = 0; i < 3; ++i)
          for (int k = 0; k < 3; ++k) {
            double s = 0.0;
            for (int l = 0; l < 3; ++l) {
              s += A(i, l) * dA[l](k, m);
              for (int nn = 0; nn < 3; ++nn) s += A(i, l) * A(k, nn) * G(m, l, nn);
            }
            T(m, i, k) = s;
          }

      Tensor3& W = conn.omega[p];
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
          for (int k = 0; k < 3; ++k) {
            double s = 0.0;
            for (int m = 0; m < 3; ++m)
              for (int h = 0; h < 3; ++h) s += T(m, i, k) * A(j, h) * gbar(m, h);
            W(j, i, k) = s;
          }
    }
  });
  return conn;
}

}  // namespace surflow
