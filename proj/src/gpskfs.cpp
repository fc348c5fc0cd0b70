#include "gps/gpskfs.hpp"

#include <cmath>
#include <limits>

namespace gps {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDescentSlack = 1e-12;
}

double kfs_objective(const KfsProblem& problem, const Vector& alpha, double rho,
                     const WeightVector& d) {
  const Matrix k = gram_matrix(problem.kernel, d, problem.points);
  const Vector s = k * alpha;
  double obj = 0.5 * alpha.dot(s) - rho;
  for (Eigen::Index j = problem.n_k; j < s.size(); ++j)
    obj += problem.c1 * loss(problem.loss, rho - s[j]);
  obj += problem.c2 * d.d.template lpNorm<1>();
  return obj;
}

double kfs_constraint(const KfsProblem& problem, const Vector& alpha, double rho,
                      const WeightVector& d) {
  const Matrix k = gram_matrix(problem.kernel, d, problem.points);
  const Vector s = k * alpha;
  double risk = 0.0;
  for (Eigen::Index i = 0; i < problem.n_k; ++i)
    risk += loss(problem.loss, s[i] - rho);
  return risk / static_cast<double>(problem.n_k);
}

std::pair<Vector, double> solve_alpha_rho(const KfsProblem& problem, const Matrix& gram,
                                          const Vector& alpha0, double rho0, double tol) {
  const Eigen::Index total = problem.points.rows();
  const Eigen::Index n_k = problem.n_k;
  if (gram.rows() != total || gram.cols() != total)
    throw InputError("solve_alpha_rho: gram dimension disagrees with points");
  if (problem.loss.kind != LossKind::huberized)
    throw InputError("solve_alpha_rho requires the huberized loss");

  // variables x = (alpha, rho)
  SmoothConstrainedProblem sp;
  sp.objective = [&](const Vector& x, Vector& grad) {
    const Vector alpha = x.head(total);
    const double rho = x[total];
    const Vector s = gram * alpha;
    double obj = 0.5 * alpha.dot(s) - rho;
    Vector dl = Vector::Zero(total);  // loss derivative per test row
    double dl_sum = 0.0;
    for (Eigen::Index j = n_k; j < total; ++j) {
      obj += problem.c1 * loss(problem.loss, rho - s[j]);
      dl[j] = problem.c1 * loss_grad(problem.loss, rho - s[j]);
      dl_sum += dl[j];
    }
    grad.head(total) = s - gram * dl;
    grad[total] = -1.0 + dl_sum;
    return obj;
  };
  sp.constraint = [&](const Vector& x, Vector& grad) {
    const Vector alpha = x.head(total);
    const double rho = x[total];
    const Vector s = gram * alpha;
    const double inv = 1.0 / static_cast<double>(n_k);
    double risk = 0.0;
    Vector dl = Vector::Zero(total);
    double dl_sum = 0.0;
    for (Eigen::Index i = 0; i < n_k; ++i) {
      risk += loss(problem.loss, s[i] - rho);
      dl[i] = loss_grad(problem.loss, s[i] - rho);
      dl_sum += dl[i];
    }
    grad.head(total) = inv * (gram * dl);
    grad[total] = -inv * dl_sum;
    return risk * inv;
  };
  sp.constraint_bound = problem.gamma;
  sp.lower = Vector::Constant(total + 1, -kInf);
  sp.upper = Vector::Constant(total + 1, kInf);

  Vector start(total + 1);
  start.head(total) = alpha0;
  start[total] = rho0;
  auto [x, report] = solve_smooth_constrained(sp, start, tol);
  if (report.status == SolverStatus::infeasible)
    throw TrainingError("alpha/rho step reported infeasible");
  return {x.head(total), x[total]};
}

LinearizationMatrices linearize(const KernelSpec& kernel, const WeightVector& d_prime,
                                const Vector& alpha, const Matrix& all_points) {
  if (kernel.family != KernelFamily::gaussian)
    throw InputError("linearize requires the gaussian kernel");
  const Eigen::Index total = all_points.rows();
  const Eigen::Index p = all_points.cols();
  const double inv_s2 = 1.0 / (kernel.sigma * kernel.sigma);

  LinearizationMatrices lin;
  lin.a.resize(total, total);
  lin.b = Matrix::Zero(p, total);

  Vector sqdiff(p);
  for (Eigen::Index i = 0; i < total; ++i) {
    for (Eigen::Index j = 0; j < total; ++j) {
      double wsq = 0.0;
      for (Eigen::Index t = 0; t < p; ++t) {
        const double diff = all_points(i, t) - all_points(j, t);
        sqdiff[t] = diff * diff;
        const double wd = d_prime.d[t] * diff;
        wsq += wd * wd;
      }
      const double k = std::exp(-wsq * inv_s2);
      // grad_t = k * (-2 d_t sqdiff_t / sigma^2); a = k - grad'd = k(1 + 2 wsq/sigma^2)
      lin.a(i, j) = k * (1.0 + 2.0 * wsq * inv_s2);
      if (alpha[j] != 0.0) {
        const double scale = alpha[j] * k * (-2.0) * inv_s2;
        for (Eigen::Index t = 0; t < p; ++t)
          lin.b(t, i) += scale * d_prime.d[t] * sqdiff[t];
      }
    }
  }
  return lin;
}

WeightVector solve_d_step(const KfsProblem& problem, const LinearizationMatrices& lin,
                          const Vector& alpha, double rho, const WeightVector& d_start,
                          bool& stalled, double tol) {
  const Eigen::Index total = problem.points.rows();
  const Eigen::Index p = problem.points.cols();
  const Vector a_alpha = lin.a * alpha;  // per-row constant part
  const Vector b_alpha = lin.b * alpha;  // linear cost on d

  SmoothConstrainedProblem sp;
  sp.objective = [&](const Vector& d, Vector& grad) {
    double obj = 0.5 * b_alpha.dot(d);
    grad = 0.5 * b_alpha;
    for (Eigen::Index j = problem.n_k; j < total; ++j) {
      const double u = rho - a_alpha[j] - lin.b.col(j).dot(d);
      obj += problem.c1 * loss(problem.loss, u);
      grad.noalias() -= problem.c1 * loss_grad(problem.loss, u) * lin.b.col(j);
    }
    return obj;
  };
  sp.constraint = [&](const Vector& d, Vector& grad) {
    const double inv = 1.0 / static_cast<double>(problem.n_k);
    double risk = 0.0;
    grad.setZero();
    for (Eigen::Index i = 0; i < problem.n_k; ++i) {
      const double u = a_alpha[i] + lin.b.col(i).dot(d) - rho;
      risk += loss(problem.loss, u);
      grad.noalias() += loss_grad(problem.loss, u) * lin.b.col(i);
    }
    grad *= inv;
    return risk * inv;
  };
  sp.constraint_bound = problem.gamma;
  sp.lower = Vector::Zero(p);
  sp.upper = Vector::Ones(p);
  sp.l1_weight = problem.c2;

  auto [d_new, report] = solve_smooth_constrained(sp, d_start.d, tol);
  if (report.status == SolverStatus::infeasible) {
    stalled = true;
    return d_start;
  }
  stalled = false;
  WeightVector out;
  out.d = std::move(d_new);
  return out;
}

LineSearchResult line_search(const KfsProblem& problem, const Vector& alpha, double rho,
                             const WeightVector& d_prev, const WeightVector& d_cv) {
  const Vector delta = d_cv.d - d_prev.d;
  LineSearchResult res;
  res.d = d_prev;
  if (delta.template lpNorm<Eigen::Infinity>() == 0.0) return res;

  const double base = kfs_objective(problem, alpha, rho, d_prev);
  const double feas_tol = problem.gamma + 1e-6;
  for (double nu = 1.0; nu >= 1e-6; nu *= 0.5) {
    WeightVector trial;
    trial.d = d_prev.d + nu * delta;
    const double obj = kfs_objective(problem, alpha, rho, trial);
    if (obj < base - 1e-12 && kfs_constraint(problem, alpha, rho, trial) <= feas_tol) {
      res.nu = nu;
      res.d = std::move(trial);
      res.stalled = false;
      return res;
    }
  }
  return res;
}

GpskfsResult train_gpskfs(const ClassTrainingInput& input, double c1, double c2,
                          const GpskfsOptions& options) {
  input.validate();
  if (input.kernel.family != KernelFamily::gaussian)
    throw InputError("train_gpskfs requires the gaussian kernel");

  const Eigen::Index n_k = input.train_pts.rows();
  const Eigen::Index m = input.test_pts.rows();
  const Eigen::Index p = input.train_pts.cols();

  KfsProblem problem;
  problem.points.resize(n_k + m, p);
  problem.points.topRows(n_k) = input.train_pts;
  problem.points.bottomRows(m) = input.test_pts;
  problem.n_k = n_k;
  problem.kernel = input.kernel;
  problem.gamma = input.gamma;
  problem.c1 = c1;
  problem.c2 = c2;

  KfsState state;
  state.alpha = Vector::Zero(n_k + m);
  state.rho = 0.0;
  state.d = input.d;
  state.objective = kfs_objective(problem, state.alpha, state.rho, state.d);

  GpskfsResult result;
  for (int t = 0; t < options.max_outer; ++t) {
    const Matrix gram = gram_matrix(problem.kernel, state.d, problem.points);
    auto [alpha_new, rho_new] =
        solve_alpha_rho(problem, gram, state.alpha, state.rho, options.solver_tol);
    const double obj_after_ar = kfs_objective(problem, alpha_new, rho_new, state.d);
    // The first iteration establishes feasibility from the zero start and
    // is always taken; afterwards only descending steps are accepted.
    if (t > 0 && obj_after_ar > state.objective + kDescentSlack) {
      result.stalled = true;
      break;
    }
    const double alpha_move = (alpha_new - state.alpha).template lpNorm<Eigen::Infinity>();
    const double rho_move = std::abs(rho_new - state.rho);
    state.alpha = std::move(alpha_new);
    state.rho = rho_new;
    state.objective = obj_after_ar;

    double d_move = 0.0;
    for (int inner = 0; inner < options.max_inner; ++inner) {
      const LinearizationMatrices lin =
          linearize(problem.kernel, state.d, state.alpha, problem.points);
      bool d_stalled = false;
      const WeightVector d_cv =
          solve_d_step(problem, lin, state.alpha, state.rho, state.d, d_stalled,
                       options.solver_tol);
      if (d_stalled) break;
      const LineSearchResult ls = line_search(problem, state.alpha, state.rho, state.d, d_cv);
      if (ls.stalled) break;
      const double step = (ls.d.d - state.d.d).template lpNorm<Eigen::Infinity>();
      state.d = ls.d;
      d_move = std::max(d_move, step);
      if (step < options.step_tol) break;
    }
    state.objective = kfs_objective(problem, state.alpha, state.rho, state.d);
    result.objectives.push_back(state.objective);
    result.outer_iterations = t + 1;
    if (t > 0 && std::max({alpha_move, rho_move, d_move}) < options.step_tol) break;
  }

  // re-solve (alpha, rho) at the final weights so the packaged coefficients
  // match the returned d exactly; the exact convex step cannot ascend
  {
    const Matrix gram = gram_matrix(problem.kernel, state.d, problem.points);
    auto [alpha_fin, rho_fin] =
        solve_alpha_rho(problem, gram, state.alpha, state.rho, options.solver_tol);
    const double obj_fin = kfs_objective(problem, alpha_fin, rho_fin, state.d);
    if (obj_fin <= state.objective + kDescentSlack) {
      state.alpha = std::move(alpha_fin);
      state.rho = rho_fin;
      state.objective = obj_fin;
      if (!result.objectives.empty()) result.objectives.back() = obj_fin;
    }
  }

  // package, pruning near-zero coefficients
  constexpr double kPrune = 1e-8;
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < state.alpha.size(); ++i)
    if (std::abs(state.alpha[i]) > kPrune) ++kept;
  DecisionFunction f;
  f.supports.resize(kept, p);
  f.coefficients.resize(kept);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < state.alpha.size(); ++i) {
    if (std::abs(state.alpha[i]) > kPrune) {
      f.supports.row(r) = problem.points.row(i);
      f.coefficients[r++] = state.alpha[i];
    }
  }
  f.rho = state.rho;
  f.kernel = input.kernel;
  f.d = state.d;
  result.decision = std::move(f);
  return result;
}

}  // namespace gps
