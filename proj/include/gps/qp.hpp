#pragma once

#include "gps/types.hpp"

namespace gps {

enum class SolverStatus { converged, max_iter, infeasible };

/// Convergence diagnostics shared by all solvers.
struct SolverReport {
  double objective = 0.0;
  double primal_residual = 0.0;  // constraint violation, inf-norm
  double dual_residual = 0.0;    // stationarity residual, inf-norm
  int iterations = 0;
  SolverStatus status = SolverStatus::max_iter;
};

/// Dense convex QP:  min 1/2 x'Px + q'x  s.t.  lower <= Ax <= upper.
/// Equality rows are expressed as lower == upper.
struct QpSpec {
  Matrix P;
  Vector q;
  Matrix A;
  Vector lower;
  Vector upper;
};

struct QpResult {
  Vector x;
  Vector y;  // constraint multipliers
  SolverReport report;
};

/// Operator-splitting solve with an active-set polishing step. The
/// polished solution satisfies the KKT system to near machine precision
/// when the active set is identified correctly; otherwise the splitting
/// iterate at the requested tolerance is returned.
QpResult solve_qp(const QpSpec& spec, double tol = 1e-8, int max_iter = 20000);

}  // namespace gps
