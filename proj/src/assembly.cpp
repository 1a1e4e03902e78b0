#include "surflow/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "surflow/errors.hpp"
#include "surflow/parallel.hpp"

namespace surflow {

TraceConvention parse_trace_convention(const std::string& s) {
  if (s == "lemma") return TraceConvention::lemma;
  if (s == "theorem") return TraceConvention::theorem;
  throw InvalidConfig("trace_convention must be 'lemma' or 'theorem', got '" + s + "'");
}

const char* trace_convention_name(TraceConvention c) {
  return c == TraceConvention::lemma ? "lemma" : "theorem";
}

SpatialBoundary parse_spatial_boundary(const std::string& s) {
  if (s == "dirichlet" || s == "dirichlet_zero") return SpatialBoundary::dirichlet_zero;
  if (s == "neumann") return SpatialBoundary::neumann;
  if (s == "periodic_x1") return SpatialBoundary::periodic_x1;
  if (s == "periodic_x2") return SpatialBoundary::periodic_x2;
  if (s == "periodic" || s == "periodic_both") return SpatialBoundary::periodic_both;
  throw InvalidConfig("unknown spatial boundary '" + s + "'");
}

const char* spatial_boundary_name(SpatialBoundary b) {
  switch (b) {
    case SpatialBoundary::dirichlet_zero: return "dirichlet_zero";
    case SpatialBoundary::neumann: return "neumann";
    case SpatialBoundary::periodic_x1: return "periodic_x1";
    case SpatialBoundary::periodic_x2: return "periodic_x2";
    case SpatialBoundary::periodic_both: return "periodic_both";
  }
  return "?";
}

bool boundary_wraps(SpatialBoundary b, Axis axis) {
  if (axis == Axis::t) return false;
  if (b == SpatialBoundary::periodic_both) return true;
  if (b == SpatialBoundary::periodic_x1) return axis == Axis::x1;
  if (b == SpatialBoundary::periodic_x2) return axis == Axis::x2;
  return false;
}

void check_boundary(const BoundarySpec& b, const GridShape& s) {
  if (boundary_wraps(b.spatial, Axis::x1) != s.wrap1 || boundary_wraps(b.spatial, Axis::x2) != s.wrap2)
    throw InconsistentPeriodicity(std::string("boundary '") + spatial_boundary_name(b.spatial) +
                                  "' does not match the grid wraps (wrap1=" + (s.wrap1 ? "1" : "0") +
                                  ", wrap2=" + (s.wrap2 ? "1" : "0") + ")");
}

CoefficientFields pde_coefficients(const GeometryField& geom, const FrameField& frame,
                                   const ChristoffelField& chris, const ConnectionField& conn,
                                   const ImageDerivatives& imd, const Weights& w,
                                   TraceConvention convention) {
  const GridShape& sh = geom.shape;
  const auto n = sh.size();
  if (!sh.same_layout(frame.shape) || !sh.same_layout(chris.shape) || !sh.same_layout(conn.shape))
    throw ShapeMismatch("geometry inputs live on different grids");
  if (imd.dIt.size() != n || imd.dI1.size() != n || imd.dI2.size() != n)
    throw ShapeMismatch("image derivatives do not match the surface grid");
  if (!(w.alpha > 0.0) || !(w.gamma > 0.0) || w.beta < 0.0)
    throw InvalidConfig("weights need alpha > 0, gamma > 0, beta >= 0");
  if (std::abs(w.alpha - geom.alpha) > 1e-15 * w.alpha)
    throw InvalidConfig("alpha differs from the one used to build the geometry");

  CoefficientFields cf;
  cf.shape = sh;
  cf.weights = w;
  cf.convention = convention;
  cf.A.resize(n);
  cf.B.resize(n);
  cf.C.resize(n);
  cf.D.resize(n);
  const double gamma = w.gamma;

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GridPoint gp = grid_point(sh, p);
      const Mat3 Ab = frame.extended(p);
      const Tensor3& W = conn.omega[p];

      // X_i omega^j_{im} = abar^l_i d_l omega^j_{im}
      std::array<Tensor3, 3> dW;
      for (Axis ax : kAxes) dW[static_cast<int>(ax)] = axis_derivative(conn.omega, sh, ax, gp);

      // Divergence of the frame vectors.
      std::array<double, 3> div{};
      const double tr = (geom.ginv[p] * geom.dtg[p]).trace();
      if (convention == TraceConvention::lemma) {
        for (int i = 0; i < 3; ++i)
          for (int nn = 0; nn < 3; ++nn) div[i] += W(nn, nn, i);
        div[0] = 0.5 * tr / geom.alpha;
      } else {
        div[0] = tr / geom.alpha;
      }

      // ā^l_i d_l ā^m_i, nonzero only for spatial i and m.
      std::array<Vec2, 3> self{};
      for (int i = 1; i < 3; ++i)
        for (int m = 0; m < 2; ++m) {
          double s = 0.0;
          for (int l = 0; l < 2; ++l) s += frame.a[p](i - 1, l) * frame.da[l + 1][p](i - 1, m);
          self[i][m] = s;
        }

      // Data term: I_l a^l_j.
      const double I1 = imd.dI1[p], I2 = imd.dI2[p], It = imd.dIt[p];
      const Mat2& a = frame.a[p];
      Vec2 Ia;
      for (int j = 0; j < 2; ++j) Ia[j] = I1 * a(j, 0) + I2 * a(j, 1);

      cf.A[p] = Ia * It;

      Mat2 B;
      for (int j = 0; j < 2; ++j)
        for (int m = 0; m < 2; ++m) {
          double reg = 0.0;
          for (int i = 0; i < 3; ++i) {
            double xw = 0.0;
            for (int l = 0; l < 3; ++l) xw += Ab(i, l) * dW[l](j + 1, i, m + 1);
            double ww = 0.0;
            for (int nn = 0; nn < 3; ++nn) ww += W(nn, i, m + 1) * W(j + 1, i, nn);
            reg += xw + ww + div[i] * W(j + 1, i, m + 1);
          }
          B(j, m) = Ia[m] * Ia[j] + (j == m ? w.beta : 0.0) - gamma * reg;
        }
      cf.B[p] = B;

      std::array<Mat2, 3> C{};
      for (int m = 0; m < 3; ++m)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) {
            double s = 0.0;
            for (int i = 0; i < 3; ++i) {
              const double aim = Ab(i, m);
              if (j == k) s += (m > 0 ? self[i][m - 1] : 0.0) + div[i] * aim;
              s += 2.0 * W(j + 1, i, k + 1) * aim;
            }
            C[m](j, k) = -gamma * s;
          }
      cf.C[p] = C;

      Mat3 D;
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m) {
          double s = 0.0;
          for (int i = 0; i < 3; ++i) s += Ab(i, l) * Ab(i, m);
          D(l, m) = -gamma * s;
        }
      cf.D[p] = D;
    }
  }, 1024);
  return cf;
}

Vec2 outward_normal(const GeometryField& geom, const GridPoint& gp, std::size_t p) {
  const GridShape& sh = geom.shape;
  const Mat2& gi = geom.ginv[p];
  Vec2 nu{};
  for (int a = 0; a < 2; ++a) {
    const Axis ax = a == 0 ? Axis::x1 : Axis::x2;
    if (sh.wraps(ax)) continue;
    const int idx = gp.along(ax);
    double s = 0.0;
    if (idx == 0) s = -1.0;
    else if (idx == sh.extent(ax) - 1) s = 1.0;
    if (s == 0.0) continue;
    nu[0] += s * gi(0, a);
    nu[1] += s * gi(1, a);
  }
  const Mat2& g = geom.g[p];
  const double len2 = nu[0] * nu[0] * g(0, 0) + 2.0 * nu[0] * nu[1] * g(0, 1) + nu[1] * nu[1] * g(1, 1);
  return len2 > 0.0 ? nu * (1.0 / std::sqrt(len2)) : nu;
}

namespace {

struct RowBuffer {
  std::vector<std::pair<std::int32_t, double>> e;
  void add(std::int32_t col, double v) { e.emplace_back(col, v); }
};

bool spatial_boundary_point(const GridShape& s, const GridPoint& gp) {
  return (!s.wrap1 && (gp.i1 == 0 || gp.i1 == s.n1 - 1)) ||
         (!s.wrap2 && (gp.i2 == 0 || gp.i2 == s.n2 - 1));
}

}  // namespace

LinearSystem assemble_system(const CoefficientFields& cf, const BoundarySpec& bspec,
                             const FrameField& frame, const ConnectionField& conn,
                             const GeometryField& geom) {
  const GridShape& sh = cf.shape;
  if (!sh.same_layout(frame.shape) || !sh.same_layout(conn.shape) || !sh.same_layout(geom.shape))
    throw ShapeMismatch("coefficients, frame, connection and geometry grids differ");
  check_boundary(bspec, sh);
  for (Axis ax : kAxes)
    if (!sh.wraps(ax) && sh.extent(ax) < 3)
      throw GridTooSmall(std::string("assembly needs at least 3 samples along the non-periodic axis ") +
                         (ax == Axis::t ? "t" : (ax == Axis::x1 ? "x1" : "x2")));
  const double ht = sh.ht, h1 = sh.h1, h2 = sh.h2;
  const double alpha = cf.weights.alpha;
  const bool dirichlet = bspec.spatial != SpatialBoundary::neumann;
  const auto npts = sh.size();
  if (2 * npts > static_cast<std::size_t>(INT32_MAX)) throw GridTooSmall("grid too large for 32-bit column indices");

  LinearSystem sys;
  sys.shape = sh;
  sys.rhs.assign(2 * npts, 0.0);
  sys.kind.resize(npts);
  for (std::size_t p = 0; p < npts; ++p) {
    const GridPoint gp = grid_point(sh, p);
    if (spatial_boundary_point(sh, gp))
      sys.kind[p] = dirichlet ? RowKind::dirichlet : RowKind::spatial_neumann;
    else if (gp.t == 0 || gp.t == sh.nt - 1)
      sys.kind[p] = RowKind::time_boundary;
    else
      sys.kind[p] = RowKind::interior;
  }

  std::vector<RowBuffer> rows(2 * npts);
  parallel_for(npts, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GridPoint gp = grid_point(sh, p);
      const RowKind kind = sys.kind[p];
      RowBuffer* r[2] = {&rows[2 * p], &rows[2 * p + 1]};
      // Adds weight v for unknown (q, k) to row j; Dirichlet columns vanish.
      auto add = [&](int j, const GridPoint& q, int k, double v) {
        const std::size_t qi = linear_index(sh, q);
        if (sys.kind[qi] == RowKind::dirichlet) return;
        r[j]->add(static_cast<std::int32_t>(2 * qi + k), v);
      };

      if (kind == RowKind::dirichlet) {
        r[0]->add(static_cast<std::int32_t>(2 * p), 1.0);
        r[1]->add(static_cast<std::int32_t>(2 * p + 1), 1.0);
        continue;
      }

      const Tensor3& W = conn.omega[p];
      if (kind == RowKind::spatial_neumann) {
        // nu^l d_l u^j + u^k nuf^i omega^j_{ik} = 0
        const Vec2 nu = outward_normal(geom, gp, p);
        const Mat2& b = frame.b[p];
        Vec2 nuf{};
        for (int i = 0; i < 2; ++i) nuf[i] = nu[0] * b(0, i) + nu[1] * b(1, i);
        for (int l = 0; l < 2; ++l) {
          const Axis ax = l == 0 ? Axis::x1 : Axis::x2;
          const Stencil st = first_difference(sh.extent(ax), gp.along(ax), sh.wraps(ax), sh.step(ax));
          for (int s = 0; s < st.count; ++s)
            for (int j = 0; j < 2; ++j) add(j, gp.with(ax, st.index[s]), j, nu[l] * st.weight[s]);
        }
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) {
            double v = 0.0;
            for (int i = 0; i < 2; ++i) v += nuf[i] * W(j + 1, i + 1, k + 1);
            add(j, gp, k, v);
          }
        r[0]->add(static_cast<std::int32_t>(2 * p), 0.0);
        r[1]->add(static_cast<std::int32_t>(2 * p + 1), 0.0);
        continue;
      }

      const Mat2& B = cf.B[p];
      const auto& C = cf.C[p];
      const Mat3& D = cf.D[p];
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) add(j, gp, k, B(j, k));
        sys.rhs[2 * p + j] = -cf.A[p][j];
      }

      // Spatial first and second derivatives (interior: central / periodic).
      for (int a = 0; a < 2; ++a) {
        const Axis ax = a == 0 ? Axis::x1 : Axis::x2;
        const int n = sh.extent(ax), i = gp.along(ax);
        const double h = sh.step(ax);
        const Stencil d1 = first_difference(n, i, sh.wraps(ax), h);
        for (int s = 0; s < d1.count; ++s)
          for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
              if (C[a + 1](j, k) != 0.0) add(j, gp.with(ax, d1.index[s]), k, C[a + 1](j, k) * d1.weight[s]);
        const Stencil d2 = second_difference(n, i, sh.wraps(ax), h);
        for (int s = 0; s < d2.count; ++s)
          for (int j = 0; j < 2; ++j) add(j, gp.with(ax, d2.index[s]), j, D(a + 1, a + 1) * d2.weight[s]);
      }
      // Mixed spatial derivative, symmetric four-point cross.
      if (D(1, 2) != 0.0) {
        const int ip = (gp.i1 + 1) % sh.n1, im = (gp.i1 - 1 + sh.n1) % sh.n1;
        const int jp = (gp.i2 + 1) % sh.n2, jm = (gp.i2 - 1 + sh.n2) % sh.n2;
        const double c = 2.0 * D(1, 2) / (4.0 * h1 * h2);
        const GridPoint q[4] = {{gp.t, ip, jp}, {gp.t, ip, jm}, {gp.t, im, jp}, {gp.t, im, jm}};
        const double sgn[4] = {1.0, -1.0, -1.0, 1.0};
        for (int s = 0; s < 4; ++s)
          for (int j = 0; j < 2; ++j) add(j, q[s], j, sgn[s] * c);
      }

      // Time derivatives.
      const double D00 = D(0, 0);
      if (kind == RowKind::interior) {
        const GridPoint prev = gp.with(Axis::t, gp.t - 1), next = gp.with(Axis::t, gp.t + 1);
        for (int j = 0; j < 2; ++j) {
          add(j, prev, j, D00 / (ht * ht));
          add(j, gp, j, -2.0 * D00 / (ht * ht));
          add(j, next, j, D00 / (ht * ht));
          for (int k = 0; k < 2; ++k) {
            add(j, prev, k, -C[0](j, k) / (2.0 * ht));
            add(j, next, k, C[0](j, k) / (2.0 * ht));
          }
        }
      } else {
        // Ghost value from the Neumann condition d_t u^k = -alpha omega^k_{0n} u^n.
        const bool first = gp.t == 0;
        const GridPoint nb = gp.with(Axis::t, first ? 1 : sh.nt - 2);
        const double sgn = first ? 1.0 : -1.0;
        const double keep = bspec.time_connection_term ? 1.0 : 0.0;
        for (int j = 0; j < 2; ++j) {
          add(j, nb, j, 2.0 * D00 / (ht * ht));
          add(j, gp, j, -2.0 * D00 / (ht * ht));
          for (int nn = 0; nn < 2; ++nn) {
            // d_tt u^j gains (2 alpha / h) sgn omega^j_{0n} u^n
            double v = D00 * sgn * 2.0 * alpha / ht * W(j + 1, 0, nn + 1);
            // C^{0j}_k d_t u^k with d_t u^k = -alpha omega^k_{0n} u^n
            for (int k = 0; k < 2; ++k) v -= C[0](j, k) * alpha * W(k + 1, 0, nn + 1);
            add(j, gp, nn, keep * v);
          }
        }
      }
      if (kind == RowKind::time_boundary) {
        for (int j = 0; j < 2; ++j) {
          for (auto& e : r[j]->e) e.second *= 0.5;
          sys.rhs[2 * p + j] *= 0.5;
        }
      }
    }
  }, 512);

  // Sort and merge each row; keep the diagonal, drop other exact zeros.
  CsrMatrix& m = sys.matrix;
  m.rows = m.cols = 2 * npts;
  m.row_ptr.assign(2 * npts + 1, 0);
  std::size_t nnz = 0;
  for (auto& row : rows) {
    std::sort(row.e.begin(), row.e.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::size_t w = 0;
    for (std::size_t i = 0; i < row.e.size(); ++i) {
      if (w > 0 && row.e[w - 1].first == row.e[i].first) row.e[w - 1].second += row.e[i].second;
      else row.e[w++] = row.e[i];
    }
    row.e.resize(w);
    nnz += w;
  }
  m.col.reserve(nnz);
  m.val.reserve(nnz);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [c, v] : rows[r].e) {
      if (v == 0.0 && static_cast<std::size_t>(c) != r) continue;
      m.col.push_back(c);
      m.val.push_back(v);
    }
    m.row_ptr[r + 1] = static_cast<std::int64_t>(m.col.size());
    std::vector<std::pair<std::int32_t, double>>().swap(rows[r].e);
  }
  return sys;
}

}  // namespace surflow
