#pragma once

#include <vector>

#include "gps/gps_train.hpp"
#include "gps/kernel.hpp"
#include "gps/losses.hpp"
#include "gps/solver.hpp"
#include "gps/types.hpp"

namespace gps {

/// Iterate of the alternating optimization. alpha spans the combined
/// n_k + m representer points (train rows first).
struct KfsState {
  Vector alpha;
  double rho = 0.0;
  WeightVector d;
  double objective = 0.0;
};

/// First-order kernel expansion at d':
///   A[i,j] = K_d'[i,j] - grad K_d'[i,j]' d'
///   B[:,i] = sum_j alpha_j grad K_d'[i,j]
/// so that the approximate row score is A[i,:]alpha + B[:,i]'d.
struct LinearizationMatrices {
  Matrix a;  // (n_k+m) x (n_k+m)
  Matrix b;  // p x (n_k+m)
};

struct KfsProblem {
  Matrix points;       // (n_k+m) x p, train rows then test rows
  Eigen::Index n_k;    // number of train rows
  KernelSpec kernel;   // gaussian
  double gamma = 0.05;
  double c1 = 1.0;
  double c2 = 0.1;
  LossSpec loss = LossSpec::huberized();
};

/// Objective of the weighted-kernel problem at (alpha, rho, d):
///   1/2 a'K_d a - rho + C1 sum_test loss(rho - K_d[j,:]a) + C2 ||d||_1.
double kfs_objective(const KfsProblem& problem, const Vector& alpha, double rho,
                     const WeightVector& d);

/// Empirical surrogate risk of the train rows, (1/n_k) sum_i loss(f(x_i)).
double kfs_constraint(const KfsProblem& problem, const Vector& alpha, double rho,
                      const WeightVector& d);

/// Convex step in (alpha, rho) with d fixed. Warm-started from (alpha0, rho0).
std::pair<Vector, double> solve_alpha_rho(const KfsProblem& problem, const Matrix& gram,
                                          const Vector& alpha0, double rho0,
                                          double tol = 1e-6);

LinearizationMatrices linearize(const KernelSpec& kernel, const WeightVector& d_prime,
                                const Vector& alpha, const Matrix& all_points);

/// Convex step in d on the linearized problem: box [0,1]^p, l1 weight C2.
/// Returns the previous d with `stalled = true` when no feasible point is found.
WeightVector solve_d_step(const KfsProblem& problem, const LinearizationMatrices& lin,
                          const Vector& alpha, double rho, const WeightVector& d_start,
                          bool& stalled, double tol = 1e-6);

/// Backtracking search along delta = d_cv - d_prev on the true objective.
/// A step is accepted only if it decreases the objective and keeps the
/// (nonlinear) train-risk constraint feasible. nu == 0 signals a stall.
struct LineSearchResult {
  double nu = 0.0;
  WeightVector d;
  bool stalled = true;
};
LineSearchResult line_search(const KfsProblem& problem, const Vector& alpha, double rho,
                             const WeightVector& d_prev, const WeightVector& d_cv);

struct GpskfsOptions {
  int max_outer = 50;
  int max_inner = 20;
  double step_tol = 1e-4;   // convergence threshold on iterate movement
  double solver_tol = 1e-6;
};

struct GpskfsResult {
  DecisionFunction decision;           // with the learned d
  std::vector<double> objectives;      // one entry per completed outer iteration
  int outer_iterations = 0;
  bool stalled = false;
};

/// Full alternating loop: initialize (alpha, rho) = 0, d = 1; update
/// (alpha, rho) against the newest d, then d against the newest (alpha, rho).
/// The objective is nonincreasing across accepted iterations by
/// construction; steps that fail to descend terminate the loop.
GpskfsResult train_gpskfs(const ClassTrainingInput& input, double c1, double c2,
                          const GpskfsOptions& options = {});

}  // namespace gps
