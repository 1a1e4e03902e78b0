#include "surflow/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "surflow/errors.hpp"
#include "surflow/parallel.hpp"

namespace surflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

SurfaceKind parse_surface_kind(const std::string& name) {
  if (name == "deforming_torus" || name == "torus") return SurfaceKind::deforming_torus;
  if (name == "graph") return SurfaceKind::graph;
  if (name == "flat_plane" || name == "plane") return SurfaceKind::flat_plane;
  if (name == "sphere_chart" || name == "sphere") return SurfaceKind::sphere_chart;
  throw InvalidSpec("unknown surface kind '" + name + "'");
}

const char* surface_kind_name(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::deforming_torus: return "deforming_torus";
    case SurfaceKind::graph: return "graph";
    case SurfaceKind::flat_plane: return "flat_plane";
    case SurfaceKind::sphere_chart: return "sphere_chart";
  }
  return "?";
}

double AnalyticSurfaceSpec::duration() const {
  if (period > 0.0) return period;
  return grid.nt > 1 ? (grid.nt - 1) * grid.ht : grid.ht;
}

GridShape surface_grid(const AnalyticSurfaceSpec& spec) {
  GridShape g = spec.grid;
  if (spec.kind == SurfaceKind::sphere_chart) {
    const double eps = spec.sphere.pole_margin;
    g.h1 = g.wrap1 ? kTwoPi / g.n1 : spec.sphere.longitude_extent / std::max(1, g.n1 - 1);
    g.h2 = (std::numbers::pi - 2.0 * eps) / std::max(1, g.n2 - 1);
  }
  return g;
}

namespace {

void check_spec(const AnalyticSurfaceSpec& s) {
  const GridShape& g = s.grid;
  if (g.nt < 1 || g.n1 < 2 || g.n2 < 2) throw InvalidSpec("surface grid needs nt >= 1 and n1, n2 >= 2");
  if (!(g.ht > 0.0 && g.h1 > 0.0 && g.h2 > 0.0)) throw InvalidSpec("surface steps must be positive");
  switch (s.kind) {
    case SurfaceKind::deforming_torus:
      if (!g.wrap1 || !g.wrap2) throw InvalidSpec("deforming_torus must wrap both axes");
      if (s.torus.tube <= 0.0 || s.torus.R <= s.torus.tube + std::abs(s.torus.ripple))
        throw InvalidSpec("torus needs R > tube + |ripple| > 0");
      break;
    case SurfaceKind::graph:
      if (g.wrap1 || g.wrap2) throw InvalidSpec("graph surfaces do not wrap");
      if (s.graph.samples) {
        const ImageSequence& z = *s.graph.samples;
        if (z.nt != g.nt || z.n1 != g.n1 || z.n2 != g.n2)
          throw InvalidSpec("height samples do not match the surface grid");
      } else if (!(s.graph.width > 0.0)) {
        throw InvalidSpec("graph bump width must be positive");
      }
      break;
    case SurfaceKind::sphere_chart:
      if (g.wrap2) throw InvalidSpec("sphere chart cannot wrap the colatitude axis");
      if (!(s.sphere.pole_margin > 0.0 && s.sphere.pole_margin < std::numbers::pi / 2))
        throw InvalidSpec("sphere pole margin must lie in (0, pi/2)");
      if (!(s.sphere.radius > 0.0)) throw InvalidSpec("sphere radius must be positive");
      break;
    case SurfaceKind::flat_plane:
      break;
  }
}

SurfaceSample torus_sample(const AnalyticSurfaceSpec& s, double t, double x1, double x2) {
  const TorusParams& P = s.torus;
  const GridShape& g = s.grid;
  const double T = s.duration();
  const double tau = t / T;
  const double k1 = kTwoPi / (g.n1 * g.h1), k2 = kTwoPi / (g.n2 * g.h2);
  const double theta = P.rotation_speed * t + P.rotation_wobble * std::sin(kTwoPi * tau);
  const double dtheta = P.rotation_speed + P.rotation_wobble * kTwoPi / T * std::cos(kTwoPi * tau);
  const double p = k1 * x1 + theta, q = k2 * x2;
  const double cp = std::cos(p), sp = std::sin(p), cq = std::cos(q), sq = std::sin(q);
  const double m = P.ripple_frequency;
  const double r = P.tube + P.ripple * tau * std::sin(m * p);
  const double rp = P.ripple * tau * m * std::cos(m * p);
  const double rpp = -P.ripple * tau * m * m * std::sin(m * p);
  const double rtau = P.ripple * std::sin(m * p);
  const double X = P.R + P.ellipse * tau + r * cq;  // radius in the x component
  const double Y = P.R + r * cq;

  const Vec3 F{X * cp, Y * sp, r * sq};
  const Vec3 Fp{rp * cq * cp - X * sp, rp * cq * sp + Y * cp, rp * sq};
  const Vec3 Fq{-r * sq * cp, -r * sq * sp, r * cq};
  const Vec3 Fpp{rpp * cq * cp - 2.0 * rp * cq * sp - X * cp, rpp * cq * sp + 2.0 * rp * cq * cp - Y * sp,
                 rpp * sq};
  const Vec3 Fpq{-rp * sq * cp + r * sq * sp, -rp * sq * sp - r * sq * cp, rp * cq};
  const Vec3 Fqq{-r * cq * cp, -r * cq * sp, -r * sq};
  const Vec3 Ftau{(P.ellipse + rtau * cq) * cp, rtau * cq * sp, rtau * sq};

  SurfaceSample o;
  o.f = F;
  o.f1 = k1 * Fp;
  o.f2 = k2 * Fq;
  o.f11 = (k1 * k1) * Fpp;
  o.f12 = (k1 * k2) * Fpq;
  o.f22 = (k2 * k2) * Fqq;
  o.ft = Ftau * (1.0 / T) + Fp * dtheta;
  return o;
}

SurfaceSample sphere_sample(const AnalyticSurfaceSpec& s, double t, double x1, double x2) {
  const double T = s.duration();
  const double rho = s.sphere.radius * (1.0 + s.sphere.growth * t / T);
  const double drho = s.sphere.radius * s.sphere.growth / T;
  const double c1 = std::cos(x1), s1 = std::sin(x1), c2 = std::cos(x2), s2 = std::sin(x2);
  const Vec3 unit{s2 * c1, s2 * s1, c2};
  SurfaceSample o;
  o.f = rho * unit;
  o.ft = drho * unit;
  o.f1 = rho * Vec3{-s2 * s1, s2 * c1, 0.0};
  o.f2 = rho * Vec3{c2 * c1, c2 * s1, -s2};
  o.f11 = rho * Vec3{-s2 * c1, -s2 * s1, 0.0};
  o.f12 = rho * Vec3{-c2 * s1, c2 * c1, 0.0};
  o.f22 = rho * Vec3{-s2 * c1, -s2 * s1, -c2};
  return o;
}

SurfaceSample plane_sample(const AnalyticSurfaceSpec& s, double t, double x1, double x2) {
  const double a = 1.0 + s.plane.scale_rate * t;
  SurfaceSample o;
  o.f = {a * x1, a * x2, 0.0};
  o.ft = {s.plane.scale_rate * x1, s.plane.scale_rate * x2, 0.0};
  o.f1 = {a, 0.0, 0.0};
  o.f2 = {0.0, a, 0.0};
  return o;
}

SurfaceSample graph_sample(const AnalyticSurfaceSpec& s, double t, double x1, double x2) {
  const GraphParams& G = s.graph;
  const double T = s.duration();
  const double tau = t / T;
  const double A = G.amplitude0 + G.amplitude1 * tau;
  const double d1 = x1 - (G.center1 + G.velocity1 * tau);
  const double d2 = x2 - (G.center2 + G.velocity2 * tau);
  const double w2 = G.width * G.width;
  const double E = std::exp(-(d1 * d1 + d2 * d2) / (2.0 * w2));
  const double z = A * E + G.lift * t;
  const double z1 = -A * E * d1 / w2, z2 = -A * E * d2 / w2;
  const double z11 = A * E * (d1 * d1 / (w2 * w2) - 1.0 / w2);
  const double z22 = A * E * (d2 * d2 / (w2 * w2) - 1.0 / w2);
  const double z12 = A * E * d1 * d2 / (w2 * w2);
  const double zt = G.amplitude1 / T * E + A * E * (d1 * G.velocity1 + d2 * G.velocity2) / (w2 * T) + G.lift;
  SurfaceSample o;
  o.f = {x1, x2, z};
  o.ft = {0.0, 0.0, zt};
  o.f1 = {1.0, 0.0, z1};
  o.f2 = {0.0, 1.0, z2};
  o.f11 = {0.0, 0.0, z11};
  o.f12 = {0.0, 0.0, z12};
  o.f22 = {0.0, 0.0, z22};
  return o;
}

}  // namespace

SurfaceSample evaluate_surface(const AnalyticSurfaceSpec& spec, double t, double x1, double x2) {
  switch (spec.kind) {
    case SurfaceKind::deforming_torus: return torus_sample(spec, t, x1, x2);
    case SurfaceKind::sphere_chart: return sphere_sample(spec, t, x1, x2);
    case SurfaceKind::flat_plane: return plane_sample(spec, t, x1, x2);
    case SurfaceKind::graph:
      if (spec.graph.samples) throw InvalidSpec("sampled graphs have no closed form");
      return graph_sample(spec, t, x1, x2);
  }
  throw InvalidSpec("unknown surface kind");
}

SurfaceGrid make_surface(const AnalyticSurfaceSpec& spec_in) {
  check_spec(spec_in);
  AnalyticSurfaceSpec spec = spec_in;
  spec.grid = surface_grid(spec_in);
  if (spec.kind == SurfaceKind::sphere_chart) spec.origin2 = spec.sphere.pole_margin;
  const GridShape& g = spec.grid;

  SurfaceGrid out;
  out.resize(g);
  if (spec.kind == SurfaceKind::graph && spec.graph.samples) {
    const ImageSequence& z = *spec.graph.samples;
    for (int t = 0; t < g.nt; ++t)
      for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
          out.f[g.index(t, i, j)] = {spec.origin1 + i * g.h1, spec.origin2 + j * g.h2, z.at(t, i, j)};
    recompute_derivatives(out);
    return out;
  }
  parallel_for(g.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GridPoint gp = grid_point(g, p);
      const SurfaceSample s = evaluate_surface(spec, spec.time_at(gp.t), spec.origin1 + gp.i1 * g.h1,
                                               spec.origin2 + gp.i2 * g.h2);
      out.f[p] = s.f;
      out.ft[p] = s.ft;
      out.f1[p] = s.f1;
      out.f2[p] = s.f2;
      out.f11[p] = s.f11;
      out.f12[p] = s.f12;
      out.f22[p] = s.f22;
    }
  }, 1024);
  return out;
}

std::vector<Vec2> tangential_velocity(const SurfaceGrid& s) {
  s.validate();
  std::vector<Vec2> v(s.shape.size());
  for (std::size_t p = 0; p < v.size(); ++p) {
    const Vec3& a = s.f1[p];
    const Vec3& b = s.f2[p];
    const double g11 = dot(a, a), g12 = dot(a, b), g22 = dot(b, b);
    const double det = g11 * g22 - g12 * g12;
    if (!(det > kDegenerateMetricEps)) throw DegenerateMetric("degenerate metric in tangential velocity");
    const double r1 = dot(s.ft[p], a), r2 = dot(s.ft[p], b);
    v[p] = Vec2{{(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det}};
  }
  return v;
}

double max_tangential_speed(const SurfaceGrid& s) {
  const std::vector<Vec2> v = tangential_velocity(s);
  const GridShape& g = s.shape;
  double m = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p) {
    const GridPoint gp = grid_point(g, p);
    if (!g.wrap1 && (gp.i1 == 0 || gp.i1 == g.n1 - 1)) continue;
    if (!g.wrap2 && (gp.i2 == 0 || gp.i2 == g.n2 - 1)) continue;
    m = std::max({m, std::abs(v[p][0]), std::abs(v[p][1])});
  }
  return m;
}

namespace {

// Bilinear lookup in one time slice at a position measured in cells.
struct Bilinear {
  std::size_t idx[4];
  double w[4];
};

double locate(double s, int n, bool wrap, int& i0, int& i1) {
  if (wrap) {
    const double fl = std::floor(s);
    const double frac = s - fl;
    int k = static_cast<int>(fl) % n;
    if (k < 0) k += n;
    i0 = k;
    i1 = (k + 1) % n;
    return frac;
  }
  constexpr double tol = 1e-9;
  if (s < -tol || s > (n - 1) + tol)
    throw BoundaryViolation("tangential motion carries points out of the non-periodic chart");
  s = std::clamp(s, 0.0, static_cast<double>(n - 1));
  i0 = std::min(static_cast<int>(std::floor(s)), n - 2);
  i1 = i0 + 1;
  return s - i0;
}

Bilinear bilinear(const GridShape& g, int t, double s1, double s2) {
  int a0, a1, b0, b1;
  const double f1 = locate(s1, g.n1, g.wrap1, a0, a1);
  const double f2 = locate(s2, g.n2, g.wrap2, b0, b1);
  return {{g.index(t, a0, b0), g.index(t, a1, b0), g.index(t, a0, b1), g.index(t, a1, b1)},
          {(1 - f1) * (1 - f2), f1 * (1 - f2), (1 - f1) * f2, f1 * f2}};
}

template <class T>
T sample(const std::vector<T>& field, const Bilinear& b) {
  T acc{};
  for (int k = 0; k < 4; ++k) acc += field[b.idx[k]] * b.w[k];
  return acc;
}

}  // namespace

SurfaceGrid remove_tangential_motion(const SurfaceGrid& surface, TangentialRemovalReport* report) {
  surface.validate();
  const GridShape& g = surface.shape;
  if (g.n1 < 2 || g.n2 < 2) throw GridTooSmall("tangential-motion removal needs n1, n2 >= 2");
  const std::vector<Vec2> V = tangential_velocity(surface);

  // d[p] = phi_t(x) - x in chart units.
  std::vector<Vec2> d(g.size());
  double max_cells = 0.0;
  auto velocity_at = [&](int t, std::size_t p, const Vec2& disp) {
    const GridPoint gp = grid_point(g, p);
    const Bilinear b = bilinear(g, t, gp.i1 + disp[0] / g.h1, gp.i2 + disp[1] / g.h2);
    return sample(V, b);
  };
  const std::size_t fs = g.frame_size();
  for (int t = 0; t + 1 < g.nt; ++t) {
    for (std::size_t q = 0; q < fs; ++q) {
      const std::size_t p = t * fs + q;
      const Vec2 k1 = velocity_at(t, q, d[p]) * -1.0;
      const Vec2 pred = d[p] + k1 * g.ht;
      const Vec2 k2 = velocity_at(t + 1, q, pred) * -1.0;
      const Vec2 step = (k1 + k2) * (0.5 * g.ht);
      const double cells = std::max(std::abs(step[0]) / g.h1, std::abs(step[1]) / g.h2);
      max_cells = std::max(max_cells, cells);
      if (cells > 0.5)
        throw CFLExceeded("reparametrization step moves " + std::to_string(cells) +
                          " cells at frame " + std::to_string(t) + "; increase nt");
      d[p + fs] = d[p] + step;
      // validates the new position against non-periodic bounds
      const GridPoint gp = grid_point(g, q);
      (void)bilinear(g, t + 1, gp.i1 + d[p + fs][0] / g.h1, gp.i2 + d[p + fs][1] / g.h2);
    }
  }

  SurfaceGrid out;
  out.resize(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const GridPoint gp = grid_point(g, p);
    const Bilinear b = bilinear(g, gp.t, gp.i1 + d[p][0] / g.h1, gp.i2 + d[p][1] / g.h2);
    const Vec3 f = sample(surface.f, b);
    const Vec3 f1 = sample(surface.f1, b), f2 = sample(surface.f2, b);
    const Vec3 f11 = sample(surface.f11, b), f12 = sample(surface.f12, b), f22 = sample(surface.f22, b);
    const Vec3 ft = sample(surface.ft, b);

    // J(m, l) = d_l phi^m, H[m](l, k) = d_lk phi^m.
    const Vec2 dd1 = axis_derivative(d, g, Axis::x1, gp);
    const Vec2 dd2 = axis_derivative(d, g, Axis::x2, gp);
    const Vec2 d11 = axis_second_derivative(d, g, Axis::x1, gp);
    const Vec2 d22 = axis_second_derivative(d, g, Axis::x2, gp);
    Vec2 mixed{};
    {
      const Stencil s2 = first_difference(g.n2, gp.i2, g.wrap2, g.h2);
      for (int k = 0; k < s2.count; ++k)
        mixed += axis_derivative(d, g, Axis::x1, gp.with(Axis::x2, s2.index[k])) * s2.weight[k];
    }
    const Vec2 dphi = axis_derivative(d, g, Axis::t, gp);

    const double J00 = 1.0 + dd1[0], J01 = dd2[0], J10 = dd1[1], J11 = 1.0 + dd2[1];
    out.f[p] = f;
    out.f1[p] = f1 * J00 + f2 * J10;
    out.f2[p] = f1 * J01 + f2 * J11;
    // d_lk (f o phi) = f_mn J(m,l) J(n,k) + f_m d_lk phi^m
    auto second = [&](double Jm0l, double Jm1l, double Jm0k, double Jm1k, const Vec2& h) {
      return f11 * (Jm0l * Jm0k) + f12 * (Jm0l * Jm1k + Jm1l * Jm0k) + f22 * (Jm1l * Jm1k) +
             f1 * h[0] + f2 * h[1];
    };
    out.f11[p] = second(J00, J10, J00, J10, d11);
    out.f12[p] = second(J00, J10, J01, J11, mixed);
    out.f22[p] = second(J01, J11, J01, J11, d22);
    out.ft[p] = ft + f1 * dphi[0] + f2 * dphi[1];
  }

  if (report) {
    report->max_tangential_before = max_tangential_speed(surface);
    report->max_tangential_after = max_tangential_speed(out);
    report->max_step_cells = max_cells;
  }
  return out;
}

}  // namespace surflow
