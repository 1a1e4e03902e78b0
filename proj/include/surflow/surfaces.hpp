#pragma once

#include <optional>
#include <string>

#include "surflow/geometry.hpp"
#include "surflow/imaging.hpp"

namespace surflow {

enum class SurfaceKind { deforming_torus, graph, flat_plane, sphere_chart };

SurfaceKind parse_surface_kind(const std::string& name);
const char* surface_kind_name(SurfaceKind k);

/// Ring torus ((R + e*tau + r cos q) cos p, (R + r cos q) sin p, r sin q) with
/// tube radius r = r0 + rho*tau*sin(m p), tau = t/T. The chart angles are
/// p = k1 x1 + theta(t), q = k2 x2 with k_i = 2 pi / (n_i h_i), and
/// theta(t) = rotation_speed * t + rotation_wobble * sin(2 pi tau).
struct TorusParams {
  double R = 2.0;
  double ellipse = 1.0;
  double ripple = 0.2;
  int ripple_frequency = 8;
  double tube = 1.0;
  double rotation_speed = 0.0;
  double rotation_wobble = 0.0;
};

/// Sphere of radius radius*(1 + growth*tau) in longitude/colatitude chart
/// coordinates. Colatitude covers [pole_margin, pi - pole_margin]; longitude
/// covers [0, 2 pi) when wrapped, else [0, longitude_extent].
struct SphereParams {
  double radius = 1.0;
  double growth = 0.0;
  double pole_margin = 0.15;
  double longitude_extent = 3.14159265358979323846;
};

/// Plane f = (1 + scale_rate*t) (x1, x2, 0).
struct PlaneParams {
  double scale_rate = 0.0;
};

/// Height field z(t, x1, x2). Either sampled (`samples`, derivatives by finite
/// differences) or the closed form
///   z = (a0 + a1 tau) exp(-|x - c - v tau|^2 / (2 w^2)) + lift * t.
struct GraphParams {
  std::optional<ImageSequence> samples;
  std::string samples_path;  // where `samples` was read from, if anywhere
  double amplitude0 = 0.0, amplitude1 = 0.0;
  double center1 = 0.0, center2 = 0.0;
  double velocity1 = 0.0, velocity2 = 0.0;
  double width = 1.0;
  double lift = 0.0;
};

struct AnalyticSurfaceSpec {
  SurfaceKind kind = SurfaceKind::flat_plane;
  /// Sizes, steps and wraps. For sphere charts the spatial steps are derived
  /// from the chart bounds and the given h1/h2 are ignored.
  GridShape grid;
  double origin1 = 0.0, origin2 = 0.0;  // chart coordinate of index 0
  double t0 = 0.0;                      // time of frame 0
  double period = 0.0;                  // T; <= 0 means (nt - 1) h_t (or h_t if nt == 1)

  TorusParams torus;
  SphereParams sphere;
  PlaneParams plane;
  GraphParams graph;

  double duration() const;
  double time_at(int k) const { return t0 + k * grid.ht; }
};

/// Samples the builtin surface with exact derivatives. Throws InvalidSpec for
/// inconsistent wraps, sizes or parameters.
SurfaceGrid make_surface(const AnalyticSurfaceSpec& spec);

/// Grid actually used by make_surface (sphere steps filled in).
GridShape surface_grid(const AnalyticSurfaceSpec& spec);

/// Pointwise evaluation of f and its derivatives at chart coordinates (x1, x2)
/// and time t (closed-form kinds only; sampled graphs throw InvalidSpec).
struct SurfaceSample {
  Vec3 f, ft, f1, f2, f11, f12, f22;
};
SurfaceSample evaluate_surface(const AnalyticSurfaceSpec& spec, double t, double x1, double x2);

struct TangentialRemovalReport {
  double max_tangential_before = 0.0;  // max |(f_t^T)^l| of the input
  double max_tangential_after = 0.0;   // same quantity on the reparametrized grid
  double max_step_cells = 0.0;         // largest per-step displacement in cells
};

/// Coordinate velocity of the tangential part of f_t: g^{lm} <f_t, d_m f>.
std::vector<Vec2> tangential_velocity(const SurfaceGrid& surface);

/// Largest |(f_t^T)^l| over the grid, skipping boundary nodes of non-periodic axes.
double max_tangential_speed(const SurfaceGrid& surface);

/// Reparametrizes the surface so that its velocity is normal: integrates
/// phi_t = -f_t^T(phi) with Heun's method and bilinear resampling.
SurfaceGrid remove_tangential_motion(const SurfaceGrid& surface,
                                     TangentialRemovalReport* report = nullptr);

}  // namespace surflow
