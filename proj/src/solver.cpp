#include "surflow/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "surflow/errors.hpp"
#include "surflow/kernels.hpp"

namespace surflow {

Preconditioner parse_preconditioner(const std::string& s) {
  if (s == "none") return Preconditioner::none;
  if (s == "jacobi") return Preconditioner::jacobi;
  throw InvalidConfig("preconditioner must be 'none' or 'jacobi', got '" + s + "'");
}

const char* preconditioner_name(Preconditioner p) { return p == Preconditioner::none ? "none" : "jacobi"; }

void SolverConfig::validate() const {
  if (restart < 1) throw InvalidConfig("restart must be >= 1");
  if (max_iters < restart) throw InvalidConfig("max_iters must be >= restart");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidConfig("rel_tol must lie in (0, 1)");
}

std::vector<double> block_jacobi_inverse(const CsrMatrix& A) {
  const std::size_t nb = A.rows / 2;
  std::vector<double> inv(4 * nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t r = 2 * b;
    const double a = A.at(r, r), c = A.at(r, r + 1), d = A.at(r + 1, r), e = A.at(r + 1, r + 1);
    const double det = a * e - c * d;
    const double scale = std::max({std::abs(a), std::abs(c), std::abs(d), std::abs(e)});
    double* o = &inv[4 * b];
    if (std::isfinite(det) && std::abs(det) > 1e-14 * scale * scale && scale > 0.0) {
      o[0] = e / det;
      o[1] = -c / det;
      o[2] = -d / det;
      o[3] = a / det;
    } else {
      o[0] = a != 0.0 ? 1.0 / a : 1.0;
      o[1] = o[2] = 0.0;
      o[3] = e != 0.0 ? 1.0 / e : 1.0;
    }
  }
  return inv;
}

namespace {

class Precond {
 public:
  Precond(const CsrMatrix& A, Preconditioner kind) {
    if (kind == Preconditioner::jacobi && A.rows % 2 == 0 && A.rows == A.cols) inv_ = block_jacobi_inverse(A);
  }
  void apply(const std::vector<double>& in, std::vector<double>& out) const {
    out.resize(in.size());
    if (inv_.empty()) {
      out = in;
      return;
    }
    for (std::size_t b = 0; b < inv_.size() / 4; ++b) {
      const double* m = &inv_[4 * b];
      const double x = in[2 * b], y = in[2 * b + 1];
      out[2 * b] = m[0] * x + m[1] * y;
      out[2 * b + 1] = m[2] * x + m[3] * y;
    }
  }

 private:
  std::vector<double> inv_;
};

double residual(const CsrMatrix& A, const std::vector<double>& b, const std::vector<double>& x,
                std::vector<double>& r) {
  A.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return kernels::nrm2(r.data(), r.size());
}

}  // namespace

SolveResult gmres_solve(const CsrMatrix& A, const std::vector<double>& b, const SolverConfig& cfg,
                        const std::vector<double>* x0, const IterationCallback& cb) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = A.rows;
  if (A.cols != n || b.size() != n) throw ShapeMismatch("GMRES needs a square system matching the rhs");
  if (x0 && x0->size() != n) throw ShapeMismatch("initial guess has the wrong length");

  SolveResult res;
  SolveReport& rep = res.report;
  auto finish = [&] {
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  };

  const double bnorm = kernels::nrm2(b.data(), n);
  if (bnorm == 0.0) {
    res.x.assign(n, 0.0);
    rep.converged = true;
    return finish();
  }
  res.x = x0 ? *x0 : std::vector<double>(n, 0.0);
  std::vector<double>& x = res.x;

  const Precond M(A, cfg.preconditioner);
  const int m = cfg.restart;
  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<double> H((m + 1) * m), cs(m), sn(m), g(m + 1), y(m);
  auto h = [&](int i, int j) -> double& { return H[i * m + j]; };
  std::vector<double> r(n), w(n), z(n);

  double rnorm = residual(A, b, x, r);
  std::vector<double> best = x;
  double best_norm = rnorm;
  int its = 0;

  while (true) {
    rep.restart_residuals.push_back(rnorm / bnorm);
    if (rnorm / bnorm <= cfg.rel_tol || its >= cfg.max_iters) break;

    V[0] = r;
    kernels::scale(1.0 / rnorm, V[0].data(), n);
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = rnorm;
    int k = 0;
    bool broke = false;
    for (int j = 0; j < m && its < cfg.max_iters; ++j) {
      M.apply(V[j], z);
      A.multiply(z, w);
      const double w0 = kernels::nrm2(w.data(), n);
      for (int i = 0; i <= j; ++i) {
        h(i, j) = kernels::dot(w.data(), V[i].data(), n);
        kernels::axpy(-h(i, j), V[i].data(), w.data(), n);
      }
      const double hn = kernels::nrm2(w.data(), n);
      h(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double den = std::hypot(h(j, j), h(j + 1, j));
      if (den == 0.0) {
        cs[j] = 1.0;
        sn[j] = 0.0;
      } else {
        cs[j] = h(j, j) / den;
        sn[j] = h(j + 1, j) / den;
      }
      h(j, j) = cs[j] * h(j, j) + sn[j] * h(j + 1, j);
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++its;
      k = j + 1;
      const double est = std::abs(g[j + 1]) / bnorm;
      if (cb) cb(its, est);
      if (!(hn > 4.0 * std::numeric_limits<double>::epsilon() * w0)) {
        broke = true;
        break;
      }
      if (j + 1 < m) {
        V[j + 1] = w;
        kernels::scale(1.0 / hn, V[j + 1].data(), n);
      }
      if (est <= cfg.rel_tol) break;
    }

    // Back substitution on the rotated Hessenberg matrix.
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int l = i + 1; l < k; ++l) s -= h(i, l) * y[l];
      y[i] = h(i, i) != 0.0 ? s / h(i, i) : 0.0;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < k; ++i) kernels::axpy(y[i], V[i].data(), w.data(), n);
    M.apply(w, z);
    kernels::axpy(1.0, z.data(), x.data(), n);

    rnorm = residual(A, b, x, r);
    if (rnorm < best_norm) {
      best_norm = rnorm;
      best = x;
    }
    if (broke) {
      rep.restart_residuals.push_back(rnorm / bnorm);
      rep.breakdown = rnorm / bnorm > cfg.rel_tol;
      break;
    }
  }

  if (best_norm < rnorm) {
    x = best;
    rnorm = residual(A, b, x, r);
  }
  rep.iterations = its;
  rep.relative_residual = rnorm / bnorm;
  rep.converged = rep.relative_residual <= cfg.rel_tol;
  return finish();
}

}  // namespace surflow
