#pragma once

#include <vector>

#include "surflow/grid.hpp"
#include "surflow/types.hpp"

namespace surflow {

/// Determinant threshold for the spatial metric, in grid units.
inline constexpr double kDegenerateMetricEps = 1e-10;

/// Sampled embedding f : [0,T] x M -> R^3 with its first and second
/// derivatives in chart coordinates. All arrays share `shape`.
struct SurfaceGrid {
  GridShape shape;
  std::vector<Vec3> f;
  std::vector<Vec3> ft, f1, f2;     // d_t f, d_1 f, d_2 f
  std::vector<Vec3> f11, f12, f22;  // spatial second derivatives

  void resize(const GridShape& s);
  /// Throws InvalidSpec if array sizes disagree with `shape` or a step is not positive.
  void validate() const;
};

/// Recomputes every derivative array from the samples in `f` by
/// second-order differences (periodic where wrapped, one-sided at ends).
void recompute_derivatives(SurfaceGrid& surface);

/// Pullback metric and its partial derivatives.
struct GeometryField {
  GridShape shape;
  double alpha = 1.0;
  std::vector<Mat2> g, ginv;
  std::vector<double> vol;  // sqrt(det g)
  std::vector<Mat2> dtg;    // d_t g_ij
  std::vector<Mat2> dg1;    // d_1 g_ij
  std::vector<Mat2> dg2;    // d_2 g_ij

  const Mat2& metric_partial(Axis axis, std::size_t p) const {
    return axis == Axis::t ? dtg[p] : (axis == Axis::x1 ? dg1[p] : dg2[p]);
  }
};

/// Gram-Schmidt frame X_i = a^l_i d_l (d_1 first), stored as a(i, l) with
/// a(0, 1) == 0. `b` is the matrix inverse, b(k, j) = b^j_k with d_k = b^j_k X_j.
/// `da[axis]` holds the derivative of `a` along that axis, obtained from the
/// metric partials by the chain rule.
struct FrameField {
  GridShape shape;
  double alpha = 1.0;
  std::vector<Mat2> a, b;
  std::array<std::vector<Mat2>, 3> da;

  /// Extended space-time frame matrix abar(i, l) = abar^l_i, abar(0, 0) = 1/alpha.
  Mat3 extended(std::size_t p) const;
};

struct ChristoffelField {
  GridShape shape;
  std::vector<Tensor3> gamma;  // gamma(j, i, k) = Gamma^j_{ik}
};

struct ConnectionField {
  GridShape shape;
  std::vector<Tensor3> omega;  // omega(j, i, k) = omega^j_{ik}
};

/// How the frame derivatives d_l abar^m_k entering the connection are evaluated.
enum class FrameDerivative {
  chain_rule,         // from FrameField::da (consistent with the Christoffel symbols)
  central_difference  // finite differences of the sampled frame arrays
};

GeometryField build_geometry(const SurfaceGrid& surface, double alpha);

FrameField orthonormal_frame(const GeometryField& geom);

/// Orthonormal frame coefficients of a single metric (row i = frame vector).
Mat2 gram_schmidt_frame(const Mat2& g);

ChristoffelField christoffel_symbols(const GeometryField& geom, const SurfaceGrid& surface);

ConnectionField connection_coefficients(const FrameField& frame, const ChristoffelField& chris,
                                        const GeometryField& geom,
                                        FrameDerivative mode = FrameDerivative::chain_rule);

/// Block form of the almost-product metric at one point.
Mat3 product_metric(const GeometryField& geom, std::size_t p);

}  // namespace surflow
