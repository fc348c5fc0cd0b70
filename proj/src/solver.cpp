#include "gps/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gps {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::pair<DualSolution, SolverReport> solve_dual_qp(const QpProblem& problem,
                                                    double tol, int max_iter) {
  const Eigen::Index n = problem.g_train.rows();
  const Eigen::Index m = problem.g_test.rows();
  if (problem.g_cross.rows() != n || problem.g_cross.cols() != m)
    throw InputError("solve_dual_qp: Gram block dimensions disagree");
  if (!(problem.gamma > 0.0 && problem.gamma < 1.0))
    throw InputError("solve_dual_qp: gamma must lie in (0,1)");
  if (!(problem.c_bound > 0.0)) throw InputError("solve_dual_qp: C must be positive");

  const Eigen::Index nv = n + m + 1;  // (alpha, beta, theta)
  Matrix P = Matrix::Zero(nv, nv);
  P.topLeftCorner(n, n) = problem.g_train;
  P.block(n, n, m, m) = problem.g_test;
  P.topRows(n).middleCols(n, m) = -problem.g_cross;
  P.middleRows(n, m).leftCols(n) = -problem.g_cross.transpose();

  {
    // eigenvalue-based check: LDLT pivots of a numerically singular PSD
    // Gram matrix can dip far below the true spectrum
    const Matrix h = P.topLeftCorner(n + m, n + m);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    const double floor = -1e-8 * std::max(1.0, h.trace());
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < floor)
      throw InputError("solve_dual_qp: Hessian is not PSD within tolerance");
  }

  Vector q(nv);
  q.head(n).setConstant(-1.0);
  q.segment(n, m).setConstant(-1.0);
  q[nv - 1] = static_cast<double>(n) * problem.gamma;

  // rows: alpha >= 0, alpha - theta <= 0, 0 <= beta <= C, theta >= 0, equality
  const Eigen::Index nr = 2 * n + m + 2;
  Matrix A = Matrix::Zero(nr, nv);
  Vector lo(nr), hi(nr);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < n; ++i, ++r) {
    A(r, i) = 1.0;
    lo[r] = 0.0;
    hi[r] = kInf;
  }
  for (Eigen::Index i = 0; i < n; ++i, ++r) {
    A(r, i) = 1.0;
    A(r, nv - 1) = -1.0;
    lo[r] = -kInf;
    hi[r] = 0.0;
  }
  for (Eigen::Index j = 0; j < m; ++j, ++r) {
    A(r, n + j) = 1.0;
    lo[r] = 0.0;
    hi[r] = problem.c_bound;
  }
  A(r, nv - 1) = 1.0;
  lo[r] = 0.0;
  hi[r] = kInf;
  ++r;
  A.row(r).head(n).setConstant(1.0);
  A.row(r).segment(n, m).setConstant(-1.0);
  lo[r] = 1.0;
  hi[r] = 1.0;

  QpResult qp = solve_qp({std::move(P), std::move(q), std::move(A), std::move(lo), std::move(hi)},
                         tol, max_iter);

  DualSolution sol;
  sol.alpha = qp.x.head(n).cwiseMax(0.0);
  sol.beta = qp.x.segment(n, m).cwiseMax(0.0).cwiseMin(problem.c_bound);
  sol.theta = std::max(0.0, qp.x[nv - 1]);
  return {std::move(sol), qp.report};
}

double recover_rho(const Vector& g_train, const Vector& g_test, double c_bound,
                   double gamma, double n_k) {
  if (g_train.size() == 0) throw InputError("recover_rho: empty training scores");
  const double budget = n_k * gamma;

  auto constraint = [&](double rho) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < g_train.size(); ++i)
      s += std::max(0.0, 1.0 - g_train[i] + rho);
    return s;
  };
  auto objective = [&](double rho) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < g_test.size(); ++j)
      s += std::max(0.0, 1.0 + g_test[j] - rho);
    return -rho + c_bound * s;
  };

  // Boundary root: largest rho with constraint(rho) == budget. The
  // constraint is piecewise linear, nondecreasing, with breakpoints at
  // g_train_i - 1 and slope equal to the number of active terms.
  std::vector<double> knots(g_train.data(), g_train.data() + g_train.size());
  for (double& t : knots) t -= 1.0;
  std::sort(knots.begin(), knots.end());
  double boundary;
  if (budget <= 0.0) {
    boundary = knots.front();
  } else {
    boundary = knots.front();
    double sum_t = 0.0;
    bool found = false;
    for (std::size_t k = 1; k <= knots.size(); ++k) {
      sum_t += knots[k - 1];
      const double cand = (budget + sum_t) / static_cast<double>(k);
      const double seg_hi = k < knots.size() ? knots[k] : kInf;
      if (cand >= knots[k - 1] && cand <= seg_hi) {
        boundary = cand;
        found = true;
        break;
      }
    }
    if (!found) boundary = (budget + sum_t) / static_cast<double>(knots.size());
  }

  std::vector<double> candidates = knots;
  for (Eigen::Index j = 0; j < g_test.size(); ++j) candidates.push_back(g_test[j] + 1.0);
  candidates.push_back(boundary);

  double best_rho = boundary;
  double best_obj = objective(boundary);
  const double feas_tol = 1e-10;
  for (double rho : candidates) {
    if (constraint(rho) > budget + feas_tol) continue;
    const double obj = objective(rho);
    if (obj < best_obj - 1e-12 || (std::abs(obj - best_obj) <= 1e-12 && rho > best_rho)) {
      best_obj = obj;
      best_rho = rho;
    }
  }
  return best_rho;
}

namespace {

// Prox of t*l1_weight*|.|_1 plus the box indicator.
Vector prox_step(const Vector& v, double t, const SmoothConstrainedProblem& p) {
  Vector out(v.size());
  const double thr = t * p.l1_weight;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double x = v[i];
    if (thr > 0.0) x = std::copysign(std::max(0.0, std::abs(x) - thr), x);
    out[i] = std::clamp(x, p.lower[i], p.upper[i]);
  }
  return out;
}

struct AlEval {
  double smooth;     // f + penalty
  double composite;  // smooth + l1
  double g_value;
  Vector grad;       // of the smooth part
};

AlEval eval_al(const SmoothConstrainedProblem& p, double lambda, double mu, const Vector& x,
               bool want_grad) {
  AlEval e;
  Vector gf(x.size()), gg(x.size());
  const double f = p.objective(x, gf);
  e.g_value = p.constraint(x, gg);
  const double shifted = lambda + mu * (e.g_value - p.constraint_bound);
  const double active = std::max(0.0, shifted);
  e.smooth = f + (active * active - lambda * lambda) / (2.0 * mu);
  e.composite = e.smooth + p.l1_weight * x.template lpNorm<1>();
  if (want_grad) e.grad = gf + active * gg;
  return e;
}

// Monotone accelerated proximal gradient on the augmented Lagrangian.
// Returns the final iterate; merit never increases between iterations.
Vector mfista(const SmoothConstrainedProblem& p, double lambda, double mu, Vector x,
              double tol, int max_iter, double& map_residual, int& used_iters) {
  double t_step = 1.0;
  Vector y = x;
  double momentum = 1.0;
  AlEval ex = eval_al(p, lambda, mu, x, false);
  map_residual = kInf;
  int it = 0;
  for (; it < max_iter; ++it) {
    AlEval ey = eval_al(p, lambda, mu, y, true);
    t_step *= 2.0;  // optimistic growth, then backtrack
    Vector z;
    AlEval ez;
    for (int bt = 0; bt < 60; ++bt) {
      z = prox_step(y - t_step * ey.grad, t_step, p);
      ez = eval_al(p, lambda, mu, z, false);
      const Vector diff = z - y;
      const double quad = ey.smooth + ey.grad.dot(diff) + diff.squaredNorm() / (2.0 * t_step);
      if (ez.smooth <= quad + 1e-14 * std::abs(quad)) break;
      t_step *= 0.5;
    }
    map_residual = (y - z).template lpNorm<Eigen::Infinity>() / t_step;

    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    Vector x_next = (ez.composite <= ex.composite) ? z : x;  // monotone safeguard
    const AlEval& ex_next = (ez.composite <= ex.composite) ? ez : ex;
    y = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x) +
        (momentum / momentum_next) * (z - x_next);
    // keep the extrapolation inside the box so callbacks stay well defined
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = std::clamp(y[i], p.lower[i], p.upper[i]);
    x = std::move(x_next);
    ex = ex_next;
    momentum = momentum_next;
    if (map_residual <= tol) {
      ++it;
      break;
    }
  }
  used_iters = it;
  return x;
}

}  // namespace

std::pair<Vector, SolverReport> solve_smooth_constrained(const SmoothConstrainedProblem& problem,
                                                         const Vector& start, double tol,
                                                         int max_iter) {
  if (problem.lower.size() != start.size() || problem.upper.size() != start.size())
    throw InputError("solve_smooth_constrained: box dimensions disagree");

  Vector x = start;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], problem.lower[i], problem.upper[i]);

  double lambda = 0.0;
  double mu = 10.0;
  SolverReport report;
  double map_res = kInf;
  int total_iters = 0;
  constexpr int kOuterRounds = 8;
  for (int round = 0; round < kOuterRounds; ++round) {
    int used = 0;
    const int budget = std::max(100, max_iter / kOuterRounds);
    x = mfista(problem, lambda, mu, x, tol, budget, map_res, used);
    total_iters += used;
    Vector gg(x.size());
    const double g_val = problem.constraint(x, gg);
    const double viol = std::max(0.0, g_val - problem.constraint_bound);
    lambda = std::max(0.0, lambda + mu * (g_val - problem.constraint_bound));
    if (viol <= tol && map_res <= tol) break;
    mu *= 10.0;
  }

  Vector gg(x.size());
  const double g_val = problem.constraint(x, gg);
  report.primal_residual = std::max(0.0, g_val - problem.constraint_bound);
  report.dual_residual = map_res;
  report.iterations = total_iters;
  {
    Vector gf(x.size());
    report.objective = problem.objective(x, gf) + problem.l1_weight * x.template lpNorm<1>();
  }
  if (report.primal_residual <= tol && report.dual_residual <= tol)
    report.status = SolverStatus::converged;
  else if (report.primal_residual > std::sqrt(tol))
    report.status = SolverStatus::infeasible;
  else
    report.status = SolverStatus::max_iter;
  return {std::move(x), report};
}

}  // namespace gps
