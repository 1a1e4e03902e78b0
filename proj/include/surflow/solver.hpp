#pragma once

#include <functional>
#include <string>
#include <vector>

#include "surflow/assembly.hpp"
#include "surflow/sparse.hpp"

namespace surflow {

enum class Preconditioner { none, jacobi };

Preconditioner parse_preconditioner(const std::string& s);
const char* preconditioner_name(Preconditioner p);

struct SolverConfig {
  int restart = 30;
  int max_iters = 2000;
  double rel_tol = 1e-3;
  Preconditioner preconditioner = Preconditioner::jacobi;

  /// Throws InvalidConfig unless restart >= 1, max_iters >= restart, 0 < rel_tol < 1.
  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;  // ||b - A x|| / ||b||, recomputed after the solve
  bool converged = false;
  bool breakdown = false;          // Arnoldi breakdown before reaching the tolerance
  double wall_time = 0.0;          // seconds
  std::vector<double> restart_residuals;  // true relative residual at each restart
};

struct SolveResult {
  std::vector<double> x;
  SolveReport report;
};

/// Called after every Arnoldi step with the running iteration count and the
/// recurrence estimate of the relative residual.
using IterationCallback = std::function<void(int iteration, double relative_residual)>;

/// Inverse 2x2 diagonal blocks (rows/cols 2p, 2p+1) stored row-major, four
/// values per block. Singular blocks fall back to the inverse diagonal, then identity.
std::vector<double> block_jacobi_inverse(const CsrMatrix& A);

/// Right-preconditioned restarted GMRES (modified Gram-Schmidt, Givens rotations).
SolveResult gmres_solve(const CsrMatrix& A, const std::vector<double>& b, const SolverConfig& cfg,
                        const std::vector<double>* x0 = nullptr, const IterationCallback& cb = {});

inline SolveResult gmres_solve(const LinearSystem& sys, const SolverConfig& cfg,
                               const std::vector<double>* x0 = nullptr,
                               const IterationCallback& cb = {}) {
  return gmres_solve(sys.matrix, sys.rhs, cfg, x0, cb);
}

}  // namespace surflow
