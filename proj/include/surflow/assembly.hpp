#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surflow/geometry.hpp"
#include "surflow/imaging.hpp"
#include "surflow/sparse.hpp"

namespace surflow {

/// Which divergence of the frame enters the first-order and zeroth-order terms.
/// `lemma`: div X0 = Tr(g^-1 d_t g) / (2 alpha) and div X_i = sum_n omega^n_{ni}
/// for spatial i (the Bochner Laplacian obtained by integration by parts).
/// `theorem`: div X0 = Tr(g^-1 d_t g) / alpha and no spatial divergence terms.
enum class TraceConvention { lemma, theorem };

TraceConvention parse_trace_convention(const std::string& s);
const char* trace_convention_name(TraceConvention c);

struct Weights {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 1.0;
};

/// Coefficients of A^j + B^j_m u^m + C^{mj}_k d_m u^k + D^{lm} d_lm u^j = 0.
/// Frame indices j, k, m of A, B, C run over the spatial frame {X1, X2} and are
/// stored 0-based; C[m] is indexed by the space-time derivative direction m.
struct CoefficientFields {
  GridShape shape;
  Weights weights;
  TraceConvention convention = TraceConvention::lemma;
  std::vector<Vec2> A;
  std::vector<Mat2> B;                   // B(j, m)
  std::vector<std::array<Mat2, 3>> C;    // C[m](j, k)
  std::vector<Mat3> D;                   // D(l, m), symmetric
};

CoefficientFields pde_coefficients(const GeometryField& geom, const FrameField& frame,
                                   const ChristoffelField& chris, const ConnectionField& conn,
                                   const ImageDerivatives& imd, const Weights& w,
                                   TraceConvention convention = TraceConvention::lemma);

enum class SpatialBoundary { dirichlet_zero, neumann, periodic_x1, periodic_x2, periodic_both };

SpatialBoundary parse_spatial_boundary(const std::string& s);
const char* spatial_boundary_name(SpatialBoundary b);

/// Spatial boundary treatment; the time boundary always carries the Neumann
/// condition (1/alpha) d_t u^j + u^k omega^j_{0k} = 0.
struct BoundarySpec {
  SpatialBoundary spatial = SpatialBoundary::dirichlet_zero;
  /// Keep the connection term of the time-Neumann condition (else d_t u = 0).
  bool time_connection_term = true;
};

/// Wrap flags implied by a boundary spec.
bool boundary_wraps(SpatialBoundary b, Axis axis);

/// Throws InconsistentPeriodicity if the spec and the grid disagree on wraps.
void check_boundary(const BoundarySpec& b, const GridShape& shape);

enum class RowKind : std::uint8_t { interior, time_boundary, dirichlet, spatial_neumann };

/// Sparse system M u = rhs over unknowns u[2 p + c] (p = grid point in
/// [t][x1][x2] order, c = frame component).
struct LinearSystem {
  GridShape shape;
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::vector<RowKind> kind;  // per grid point

  std::size_t unknowns() const { return rhs.size(); }
};

/// Assembles the finite-difference system; rows at time boundaries are scaled
/// by 1/2 (ghost-point elimination), Dirichlet rows are identity rows and
/// Dirichlet columns are eliminated from the remaining rows.
LinearSystem assemble_system(const CoefficientFields& coeffs, const BoundarySpec& bspec,
                             const FrameField& frame, const ConnectionField& conn,
                             const GeometryField& geom);

/// Unit outward normal nu^l (coordinate components) at a point on a
/// non-periodic spatial boundary; at corners the normals are summed first.
Vec2 outward_normal(const GeometryField& geom, const GridPoint& gp, std::size_t p);

}  // namespace surflow
