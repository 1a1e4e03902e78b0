#pragma once

#include <array>
#include <vector>

#include "surflow/assembly.hpp"
#include "surflow/geometry.hpp"
#include "surflow/imaging.hpp"

namespace surflow {

/// Flow in frame components u^j, coordinate components u~^l = a^l_m u^m and
/// ambient vectors u~^l d_l f.
struct FlowField {
  GridShape shape;
  std::vector<Vec2> u_frame;
  std::vector<Vec2> u_coord;
  std::vector<Vec3> u_ambient;
};

FlowField expand_views(const std::vector<Vec2>& u_frame, const FrameField& frame,
                       const SurfaceGrid& surface);

/// Solver vector (u[2p + c]) to per-point frame components and back.
std::vector<Vec2> unpack_flow(const std::vector<double>& x);
std::vector<double> pack_flow(const std::vector<Vec2>& u);

/// Quadrature weight alpha * vol(g) * h_t * h_1 * h_2 per grid point.
std::vector<double> quadrature_weights(const GeometryField& geom);

enum class DifferenceScheme { forward, central };

/// Frame components (nabla_{X_i} u)^j, i, j in {0, 1, 2}, stored (i, j) in a
/// Mat3; spatial derivatives use the given scheme (forward switches to
/// backward at the last node of a non-periodic axis).
std::vector<Mat3> covariant_derivative(const std::vector<Vec2>& u_frame, const FrameField& frame,
                                       const ConnectionField& conn, DifferenceScheme scheme);

struct EnergyBreakdown {
  double E = 0.0, S = 0.0, R = 0.0;
};

/// Rectangle-rule energy S + R with forward differences in the regularizer.
EnergyBreakdown discrete_energy(const FlowField& flow, const ImageDerivatives& imd,
                                const GeometryField& geom, const FrameField& frame,
                                const ConnectionField& conn, const Weights& w);

/// Everything needed to evaluate the energy and the assembled residual.
struct EnergyProblem {
  const ImageDerivatives* imd;
  const GeometryField* geom;
  const FrameField* frame;
  const ConnectionField* conn;
  const SurfaceGrid* surface;
  const LinearSystem* system;
  Weights weights;
};

double energy_of(const EnergyProblem& pb, const std::vector<Vec2>& u_frame);

struct GradientGap {
  double epsilon = 0.0;
  double directional_fd = 0.0;  // (E(u + eps du) - E(u - eps du)) / (2 eps)
  double operator_value = 0.0;  // sum_p 2 w_p (M u - rhs)_p . du_p
  double relative_gap = 0.0;    // 0 when both vanish
};

/// Compares the central-difference directional derivative of the discrete
/// energy with the assembled residual paired with du. Components of u and du
/// at Dirichlet points are treated as zero.
std::vector<GradientGap> gradient_consistency_check(const EnergyProblem& pb, std::vector<Vec2> u,
                                                    std::vector<Vec2> du,
                                                    const std::vector<double>& epsilons = {1e-3, 1e-4, 1e-5});

/// Angle between (1, u) and (1, v), in [0, pi].
std::vector<double> angular_error(const std::vector<Vec2>& u, const std::vector<Vec2>& v);
std::vector<double> angular_error(const std::vector<Vec3>& u, const std::vector<Vec3>& v);
double angular_error(const Vec2& u, const Vec2& v);
double angular_error(const Vec3& u, const Vec3& v);

std::vector<double> endpoint_error(const std::vector<Vec2>& u, const std::vector<Vec2>& v);
std::vector<double> endpoint_error(const std::vector<Vec3>& u, const std::vector<Vec3>& v);

}  // namespace surflow
