#pragma once

#include <cmath>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "surflow/assembly.hpp"
#include "surflow/flowfield.hpp"
#include "surflow/geometry.hpp"
#include "surflow/imaging.hpp"
#include "surflow/surfaces.hpp"

namespace testing {

using namespace surflow;

/// Surface, image and every derived field for one configuration.
struct Setup {
  SurfaceGrid surface;
  ImageSequence image;
  ImageDerivatives imd;
  GeometryField geom;
  FrameField frame;
  ChristoffelField chris;
  ConnectionField conn;
  CoefficientFields coeffs;
  LinearSystem system;
  Weights weights;

  EnergyProblem energy_problem() const {
    return EnergyProblem{&imd, &geom, &frame, &conn, &surface, &system, weights};
  }
};

inline Setup make_setup(SurfaceGrid surface, ImageSequence image, const Weights& w,
                        const BoundarySpec& b, bool assemble = true,
                        TraceConvention conv = TraceConvention::lemma) {
  Setup s;
  s.surface = std::move(surface);
  s.image = std::move(image);
  s.weights = w;
  const GridShape& g = s.surface.shape;
  s.imd = image_derivatives(s.image, g.ht, g.h1, g.h2);
  s.geom = build_geometry(s.surface, w.alpha);
  s.frame = orthonormal_frame(s.geom);
  s.chris = christoffel_symbols(s.geom, s.surface);
  s.conn = connection_coefficients(s.frame, s.chris, s.geom);
  s.coeffs = pde_coefficients(s.geom, s.frame, s.chris, s.conn, s.imd, w, conv);
  if (assemble) s.system = assemble_system(s.coeffs, b, s.frame, s.conn, s.geom);
  return s;
}

inline AnalyticSurfaceSpec plane_spec(int nt, int n1, int n2, double h = 1.0, bool wrap1 = false,
                                      bool wrap2 = false) {
  AnalyticSurfaceSpec s;
  s.kind = SurfaceKind::flat_plane;
  s.grid = GridShape{nt, n1, n2, h, h, h, wrap1, wrap2};
  return s;
}

/// Experiment-I style torus whose chart angles equal the coordinates (k_i = 1).
inline AnalyticSurfaceSpec torus_spec(int nt, int n1, int n2, double ht = 1.0) {
  AnalyticSurfaceSpec s;
  s.kind = SurfaceKind::deforming_torus;
  const double two_pi = 2.0 * 3.14159265358979323846;
  s.grid = GridShape{nt, n1, n2, ht, two_pi / n1, two_pi / n2, true, true};
  return s;
}

/// Translating smooth pattern sampled on the grid of `g`.
inline ImageSequence moving_pattern(const GridShape& g, double v1, double v2) {
  ImageSequence img;
  img.nt = g.nt;
  img.n1 = g.n1;
  img.n2 = g.n2;
  img.wrap1 = g.wrap1;
  img.wrap2 = g.wrap2;
  img.values.resize(g.size());
  const double k1 = 2.0 * 3.14159265358979323846 / (g.n1 * g.h1);
  const double k2 = 2.0 * 3.14159265358979323846 / (g.n2 * g.h2);
  for (int t = 0; t < g.nt; ++t)
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j) {
        const double x1 = i * g.h1 - v1 * t * g.ht, x2 = j * g.h2 - v2 * t * g.ht;
        img.at(t, i, j) = 0.5 + 0.2 * std::sin(k1 * x1 + 0.3) * std::cos(2.0 * k2 * x2) +
                          0.1 * std::sin(3.0 * k1 * x1 - k2 * x2);
      }
  return img;
}

inline ImageSequence constant_image(const GridShape& g, double c) {
  ImageSequence img;
  img.nt = g.nt;
  img.n1 = g.n1;
  img.n2 = g.n2;
  img.wrap1 = g.wrap1;
  img.wrap2 = g.wrap2;
  img.values.assign(g.size(), c);
  return img;
}

inline std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<Vec2> random_flow(std::size_t n, unsigned seed) {
  const auto v = random_vector(2 * n, seed);
  std::vector<Vec2> u(n);
  for (std::size_t p = 0; p < n; ++p) u[p] = Vec2{{v[2 * p], v[2 * p + 1]}};
  return u;
}

/// Independent pointwise oracle: metric of the analytic embedding from its
/// closed-form first derivatives, then Christoffel symbols and connection
/// coefficients from the defining formulas with central differences of step d.
struct GeometryOracle {
  const AnalyticSurfaceSpec& spec;
  double alpha;
  double d = 1e-4;

  std::array<std::array<double, 3>, 3> metric(double t, double x1, double x2) const {
    const SurfaceSample s = evaluate_surface(spec, t, x1, x2);
    std::array<std::array<double, 3>, 3> g{};
    g[0][0] = alpha * alpha;
    g[1][1] = dot(s.f1, s.f1);
    g[1][2] = g[2][1] = dot(s.f1, s.f2);
    g[2][2] = dot(s.f2, s.f2);
    return g;
  }

  static std::array<double, 3> shift(int axis, double by) {
    std::array<double, 3> e{};
    e[axis] = by;
    return e;
  }

  /// dg[l][m][k] = d_l gbar_{mk}
  std::array<std::array<std::array<double, 3>, 3>, 3> metric_partials(double t, double x1,
                                                                      double x2) const {
    std::array<std::array<std::array<double, 3>, 3>, 3> dg{};
    for (int l = 0; l < 3; ++l) {
      const auto e = shift(l, d);
      const auto gp = metric(t + e[0], x1 + e[1], x2 + e[2]);
      const auto gm = metric(t - e[0], x1 - e[1], x2 - e[2]);
      for (int m = 0; m < 3; ++m)
        for (int k = 0; k < 3; ++k) dg[l][m][k] = (gp[m][k] - gm[m][k]) / (2.0 * d);
    }
    return dg;
  }

  Tensor3 christoffel(double t, double x1, double x2) const {
    const auto g = metric(t, x1, x2);
    const auto dg = metric_partials(t, x1, x2);
    const double det = g[1][1] * g[2][2] - g[1][2] * g[2][1];
    std::array<std::array<double, 3>, 3> gi{};
    gi[0][0] = 1.0 / g[0][0];
    gi[1][1] = g[2][2] / det;
    gi[2][2] = g[1][1] / det;
    gi[1][2] = gi[2][1] = -g[1][2] / det;
    Tensor3 G;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double v = 0.0;
          for (int m = 0; m < 3; ++m) v += 0.5 * gi[i][m] * (dg[l][m][k] + dg[k][m][l] - dg[m][k][l]);
          G(i, k, l) = v;
        }
    return G;
  }

  /// abar(i, l) = abar^l_i
  std::array<std::array<double, 3>, 3> frame(double t, double x1, double x2) const {
    const auto g = metric(t, x1, x2);
    const double g11 = g[1][1], g12 = g[1][2];
    const double nn = std::sqrt(g[2][2] - g12 * g12 / g11);
    std::array<std::array<double, 3>, 3> a{};
    a[0][0] = 1.0 / alpha;
    a[1][1] = 1.0 / std::sqrt(g11);
    a[2][1] = -(g12 / g11) / nn;
    a[2][2] = 1.0 / nn;
    return a;
  }

  Tensor3 connection(double t, double x1, double x2) const {
    const auto g = metric(t, x1, x2);
    const auto a = frame(t, x1, x2);
    const Tensor3 G = christoffel(t, x1, x2);
    std::array<std::array<std::array<double, 3>, 3>, 3> da{};  // da[l](k, m)
    for (int l = 0; l < 3; ++l) {
      const auto e = shift(l, d);
      const auto ap = frame(t + e[0], x1 + e[1], x2 + e[2]);
      const auto am = frame(t - e[0], x1 - e[1], x2 - e[2]);
      for (int k = 0; k < 3; ++k)
        for (int m = 0; m < 3; ++m) da[l][k][m] = (ap[k][m] - am[k][m]) / (2.0 * d);
    }
    Tensor3 W;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
          double v = 0.0;
          for (int m = 0; m < 3; ++m) {
            double inner = 0.0;
            for (int l = 0; l < 3; ++l) {
              inner += a[i][l] * da[l][k][m];
              for (int n = 0; n < 3; ++n) inner += a[i][l] * a[k][n] * G(m, l, n);
            }
            for (int h = 0; h < 3; ++h) v += inner * a[j][h] * g[m][h];
          }
          W(j, i, k) = v;
        }
    return W;
  }
};

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("surflow_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace testing
