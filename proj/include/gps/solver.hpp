#pragma once

#include <functional>

#include "gps/qp.hpp"
#include "gps/types.hpp"

namespace gps {

/// Class-k dual problem data. The quadratic couples (alpha, beta) through
/// the three Gram blocks; theta enters linearly with coefficient n_k*gamma
/// and caps alpha from above.
struct QpProblem {
  Matrix g_train;   // n_k x n_k
  Matrix g_test;    // m x m
  Matrix g_cross;   // n_k x m
  double gamma = 0.05;  // in (0,1)
  double c_bound = 1.0; // box bound on beta, > 0
};

struct DualSolution {
  Vector alpha;
  Vector beta;
  double theta = 0.0;
};

/// Solves the stacked QP
///   min 1/2 (a'G1 a + b'G2 b - 2 a'G3 b) - 1'a - 1'b + n_k gamma theta
///   s.t. 0 <= a <= theta 1, 0 <= b <= C, 1'a - 1'b = 1, theta >= 0.
/// Throws InputError when the stacked Hessian fails the PSD tolerance
/// -1e-8 * trace.
std::pair<DualSolution, SolverReport> solve_dual_qp(const QpProblem& problem,
                                                    double tol = 1e-6,
                                                    int max_iter = 10000);

/// Offset recovery: with w fixed, minimize
///   -rho + C sum_j [1 + g_test_j - rho]_+
///   s.t.  sum_i [1 - g_train_i + rho]_+ <= n_k * gamma.
/// Piecewise linear in rho; solved exactly by breakpoint scan plus the
/// constraint-boundary root. Ties return the largest minimizing rho.
double recover_rho(const Vector& g_train, const Vector& g_test, double c_bound,
                   double gamma, double n_k);

/// min f(x) + l1_weight * ||x||_1   s.t.  g(x) <= constraint_bound,
///                                        lower <= x <= upper.
/// f and g are smooth convex callbacks returning (value, gradient).
struct SmoothConstrainedProblem {
  std::function<double(const Vector&, Vector&)> objective;   // fills gradient
  std::function<double(const Vector&, Vector&)> constraint;  // fills gradient
  double constraint_bound = 0.0;
  Vector lower;  // elementwise, -inf allowed
  Vector upper;  // elementwise, +inf allowed
  double l1_weight = 0.0;
};

/// Augmented-Lagrangian outer loop around a monotone proximal-gradient
/// inner solver; the l1 term and the box are handled in the prox step.
std::pair<Vector, SolverReport> solve_smooth_constrained(const SmoothConstrainedProblem& problem,
                                                         const Vector& start,
                                                         double tol = 1e-6,
                                                         int max_iter = 10000);

}  // namespace gps
