#include "surflow/flowfield.hpp"

#include <algorithm>
#include <cmath>

#include "surflow/errors.hpp"
#include "surflow/parallel.hpp"

namespace surflow {

FlowField expand_views(const std::vector<Vec2>& u_frame, const FrameField& frame,
                       const SurfaceGrid& surface) {
  const auto n = frame.shape.size();
  if (u_frame.size() != n || !frame.shape.same_layout(surface.shape) || surface.f1.size() != n)
    throw ShapeMismatch("flow, frame and surface sizes differ");
  FlowField fl;
  fl.shape = frame.shape;
  fl.u_frame = u_frame;
  fl.u_coord.resize(n);
  fl.u_ambient.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const Mat2& a = frame.a[p];
    const Vec2& u = u_frame[p];
    // u~^l = a^l_m u^m
    const Vec2 c{{a(0, 0) * u[0] + a(1, 0) * u[1], a(0, 1) * u[0] + a(1, 1) * u[1]}};
    fl.u_coord[p] = c;
    fl.u_ambient[p] = surface.f1[p] * c[0] + surface.f2[p] * c[1];
  }
  return fl;
}

std::vector<Vec2> unpack_flow(const std::vector<double>& x) {
  if (x.size() % 2 != 0) throw ShapeMismatch("flow vector has odd length");
  std::vector<Vec2> u(x.size() / 2);
  for (std::size_t p = 0; p < u.size(); ++p) u[p] = Vec2{{x[2 * p], x[2 * p + 1]}};
  return u;
}

std::vector<double> pack_flow(const std::vector<Vec2>& u) {
  std::vector<double> x(2 * u.size());
  for (std::size_t p = 0; p < u.size(); ++p) {
    x[2 * p] = u[p][0];
    x[2 * p + 1] = u[p][1];
  }
  return x;
}

std::vector<double> quadrature_weights(const GeometryField& geom) {
  const GridShape& s = geom.shape;
  const double cell = geom.alpha * s.ht * s.h1 * s.h2;
  std::vector<double> w(geom.vol.size());
  for (std::size_t p = 0; p < w.size(); ++p) w[p] = cell * geom.vol[p];
  return w;
}

std::vector<Mat3> covariant_derivative(const std::vector<Vec2>& u, const FrameField& frame,
                                       const ConnectionField& conn, DifferenceScheme scheme) {
  const GridShape& s = frame.shape;
  if (u.size() != s.size() || !s.same_layout(conn.shape)) throw ShapeMismatch("flow and frame sizes differ");
  std::vector<Mat3> out(u.size());
  parallel_for(u.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GridPoint gp = grid_point(s, p);
      std::array<Vec2, 3> du;
      for (Axis ax : kAxes) {
        const int n = s.extent(ax), i = gp.along(ax);
        const Stencil st = scheme == DifferenceScheme::forward
                               ? forward_difference(n, i, s.wraps(ax), s.step(ax))
                               : first_difference(n, i, s.wraps(ax), s.step(ax));
        du[static_cast<int>(ax)] = apply_stencil(u, s, ax, gp, st);
      }
      const Mat3 A = frame.extended(p);
      const Tensor3& W = conn.omega[p];
      Mat3 m;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double v = 0.0;
          if (j > 0)
            for (int l = 0; l < 3; ++l) v += A(i, l) * du[l][j - 1];
          for (int k = 0; k < 2; ++k) v += u[p][k] * W(j, i, k + 1);
          m(i, j) = v;
        }
      out[p] = m;
    }
  }, 1024);
  return out;
}

EnergyBreakdown discrete_energy(const FlowField& flow, const ImageDerivatives& imd,
                                const GeometryField& geom, const FrameField& frame,
                                const ConnectionField& conn, const Weights& w) {
  const auto n = geom.shape.size();
  if (flow.u_frame.size() != n || flow.u_coord.size() != n || imd.dIt.size() != n ||
      imd.dI1.size() != n || imd.dI2.size() != n || !geom.shape.same_layout(frame.shape) ||
      !geom.shape.same_layout(conn.shape))
    throw ShapeMismatch("energy inputs live on different grids");
  const std::vector<double> q = quadrature_weights(geom);
  const std::vector<Mat3> nab = covariant_derivative(flow.u_frame, frame, conn, DifferenceScheme::forward);
  // Sequential sums keep the result independent of the thread count.
  EnergyBreakdown e;
  for (std::size_t p = 0; p < n; ++p) {
    const Vec2& c = flow.u_coord[p];
    const double r = imd.dIt[p] + imd.dI1[p] * c[0] + imd.dI2[p] * c[1];
    e.S += q[p] * r * r;
    const Vec2& u = flow.u_frame[p];
    double grad = 0.0;
    for (double v : nab[p].v) grad += v * v;
    e.R += q[p] * (w.beta * (u[0] * u[0] + u[1] * u[1]) + w.gamma * grad);
  }
  e.E = e.S + e.R;
  return e;
}

double energy_of(const EnergyProblem& pb, const std::vector<Vec2>& u) {
  return discrete_energy(expand_views(u, *pb.frame, *pb.surface), *pb.imd, *pb.geom, *pb.frame,
                         *pb.conn, pb.weights)
      .E;
}

std::vector<GradientGap> gradient_consistency_check(const EnergyProblem& pb, std::vector<Vec2> u,
                                                    std::vector<Vec2> du,
                                                    const std::vector<double>& epsilons) {
  const LinearSystem& sys = *pb.system;
  const auto n = sys.shape.size();
  if (u.size() != n || du.size() != n) throw ShapeMismatch("flow perturbation has the wrong size");
  for (std::size_t p = 0; p < n; ++p)
    if (sys.kind[p] == RowKind::dirichlet) u[p] = du[p] = Vec2{};

  const std::vector<double> x = pack_flow(u);
  const std::vector<double> Mx = sys.matrix * x;
  const std::vector<double> q = quadrature_weights(*pb.geom);
  double op = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (int c = 0; c < 2; ++c) op += 2.0 * q[p] * (Mx[2 * p + c] - sys.rhs[2 * p + c]) * du[p][c];

  std::vector<GradientGap> out;
  for (double eps : epsilons) {
    std::vector<Vec2> up(n), um(n);
    for (std::size_t p = 0; p < n; ++p) {
      up[p] = u[p] + du[p] * eps;
      um[p] = u[p] - du[p] * eps;
    }
    GradientGap g;
    g.epsilon = eps;
    g.directional_fd = (energy_of(pb, up) - energy_of(pb, um)) / (2.0 * eps);
    g.operator_value = op;
    const double scale = std::max(std::abs(g.directional_fd), std::abs(op));
    g.relative_gap = scale == 0.0 ? 0.0 : std::abs(g.directional_fd - op) / scale;
    out.push_back(g);
  }
  return out;
}

// The angle between a = (1, u) and b = (1, v) as atan2(|a x b|, a . b); equal to
// the arccos of the normalized dot product but exact for u == v and accurate
// for small angles, where arccos loses half the digits.
namespace {

template <std::size_t N>
double augmented_angle(const std::array<double, N>& a, const std::array<double, N>& b) {
  double d = 0.0, c = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    d += a[i] * b[i];
    for (std::size_t j = i + 1; j < N; ++j) {
      const double w = a[i] * b[j] - a[j] * b[i];
      c += w * w;
    }
  }
  return std::atan2(std::sqrt(c), d);
}

}  // namespace

double angular_error(const Vec2& u, const Vec2& v) {
  return augmented_angle<3>({1.0, u[0], u[1]}, {1.0, v[0], v[1]});
}

double angular_error(const Vec3& u, const Vec3& v) {
  return augmented_angle<4>({1.0, u.x, u.y, u.z}, {1.0, v.x, v.y, v.z});
}

namespace {

template <class T, class F>
std::vector<double> pointwise(const std::vector<T>& u, const std::vector<T>& v, F f) {
  if (u.size() != v.size()) throw ShapeMismatch("flow fields differ in size");
  std::vector<double> e(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) e[p] = f(u[p], v[p]);
  return e;
}

}  // namespace

std::vector<double> angular_error(const std::vector<Vec2>& u, const std::vector<Vec2>& v) {
  return pointwise(u, v, [](const Vec2& a, const Vec2& b) { return angular_error(a, b); });
}

std::vector<double> angular_error(const std::vector<Vec3>& u, const std::vector<Vec3>& v) {
  return pointwise(u, v, [](const Vec3& a, const Vec3& b) { return angular_error(a, b); });
}

std::vector<double> endpoint_error(const std::vector<Vec2>& u, const std::vector<Vec2>& v) {
  return pointwise(u, v, [](const Vec2& a, const Vec2& b) {
    const double d0 = a[0] - b[0], d1 = a[1] - b[1];
    return std::sqrt(d0 * d0 + d1 * d1);
  });
}

std::vector<double> endpoint_error(const std::vector<Vec3>& u, const std::vector<Vec3>& v) {
  return pointwise(u, v, [](const Vec3& a, const Vec3& b) { return norm(a - b); });
}

}  // namespace surflow
