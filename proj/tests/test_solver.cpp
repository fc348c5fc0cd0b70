#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "gps/kernel.hpp"
#include "gps/solver.hpp"

using namespace gps;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dual_objective(const QpProblem& p, const Vector& alpha, const Vector& beta, double theta) {
  const double quad = 0.5 * (alpha.dot(p.g_train * alpha) + beta.dot(p.g_test * beta) -
                             2.0 * alpha.dot(p.g_cross * beta));
  return quad - alpha.sum() - beta.sum() + static_cast<double>(p.g_train.rows()) * theta * p.gamma;
}

// Exhaustive grid search over the feasible polytope at the given step.
// alpha is enumerated freely; the last beta coordinate is pinned by the
// equality constraint; theta = max(alpha) is optimal given alpha.
double grid_search_optimum(const QpProblem& p, double step) {
  const Eigen::Index n = p.g_train.rows();
  const Eigen::Index m = p.g_test.rows();
  const double alpha_hi = 1.0 + static_cast<double>(m) * p.c_bound;
  double best = kInf;
  Vector alpha(n), beta(m);

  const auto alpha_steps = static_cast<long>(std::floor(alpha_hi / step)) + 1;
  const auto beta_steps = static_cast<long>(std::floor(p.c_bound / step)) + 1;

  std::vector<long> idx(static_cast<std::size_t>(n + m - 1), 0);
  const std::size_t dims = idx.size();
  for (;;) {
    for (Eigen::Index i = 0; i < n; ++i) alpha[i] = static_cast<double>(idx[static_cast<std::size_t>(i)]) * step;
    bool ok = true;
    for (Eigen::Index j = 0; j + 1 < m; ++j)
      beta[j] = static_cast<double>(idx[static_cast<std::size_t>(n + j)]) * step;
    const double last = alpha.sum() - 1.0 - beta.head(m - 1).sum();
    if (last < -1e-12 || last > p.c_bound + 1e-12) ok = false;
    if (ok) {
      beta[m - 1] = std::clamp(last, 0.0, p.c_bound);
      const double theta = std::max(0.0, alpha.maxCoeff());
      best = std::min(best, dual_objective(p, alpha, beta, theta));
    }
    std::size_t d = 0;
    for (; d < dims; ++d) {
      const long cap = d < static_cast<std::size_t>(n) ? alpha_steps : beta_steps;
      if (++idx[d] < cap) break;
      idx[d] = 0;
    }
    if (d == dims) break;
  }
  return best;
}

QpProblem one_plus_one_instance(double gamma, double c_bound) {
  QpProblem p;
  p.g_train = Matrix::Constant(1, 1, 1.0);
  p.g_test = Matrix::Constant(1, 1, 1.0);
  p.g_cross = Matrix::Constant(1, 1, -1.0);
  p.gamma = gamma;
  p.c_bound = c_bound;
  return p;
}

}  // namespace

TEST_CASE("dual QP solves the analytic 1+1-point instance") {
  const QpProblem p = one_plus_one_instance(0.05, 1.0);
  auto [sol, report] = solve_dual_qp(p);
  CHECK(report.status == SolverStatus::converged);
  CHECK(sol.alpha[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.beta[0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.theta == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(report.objective == doctest::Approx(0.05 - 0.5).epsilon(1e-8));

  // gamma only shifts the objective; the minimizer is unchanged
  for (double gamma : {0.01, 0.3, 0.9}) {
    auto [s2, r2] = solve_dual_qp(one_plus_one_instance(gamma, 1.0));
    CHECK(s2.alpha[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s2.theta == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r2.objective == doctest::Approx(gamma - 0.5).epsilon(1e-8));
  }
}

TEST_CASE("dual QP returns feasible points and beats the grid oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ugamma(0.02, 0.5);
  std::uniform_real_distribution<double> uc(0.2, 0.5);
  const std::vector<std::pair<int, int>> shapes{{1, 2}, {2, 1}, {2, 2}, {1, 3}, {3, 2}, {2, 3}};
  for (int rep = 0; rep < 18; ++rep) {
    const auto [n, m] = shapes[static_cast<std::size_t>(rep) % shapes.size()];
    Matrix train(n, 2), test(m, 2);
    for (Eigen::Index i = 0; i < train.size(); ++i) train.data()[i] = nd(rng);
    for (Eigen::Index i = 0; i < test.size(); ++i) test.data()[i] = nd(rng);
    const KernelSpec k = KernelSpec::gaussian(1.0);
    const WeightVector ones = WeightVector::ones(2);
    const GramBlocks b = gram_blocks(k, ones, train, test);
    QpProblem p{b.train_train, b.test_test, b.train_test, ugamma(rng), uc(rng)};
    auto [sol, report] = solve_dual_qp(p);

    const double tol = 1e-6;
    CHECK(sol.alpha.minCoeff() >= -tol);
    CHECK(sol.alpha.maxCoeff() <= sol.theta + tol);
    CHECK(sol.beta.minCoeff() >= -tol);
    CHECK(sol.beta.maxCoeff() <= p.c_bound + tol);
    CHECK(sol.theta >= -tol);
    CHECK(sol.alpha.sum() - sol.beta.sum() == doctest::Approx(1.0).epsilon(1e-6));

    const double grid = grid_search_optimum(p, 0.02);
    CHECK(report.objective <= grid + 1e-4);
  }
}

TEST_CASE("dual QP rejects a non-PSD Hessian") {
  QpProblem p = one_plus_one_instance(0.05, 1.0);
  p.g_cross(0, 0) = -5.0;  // makes the stacked Gram indefinite
  CHECK_THROWS_AS(solve_dual_qp(p), InputError);
}

namespace {

// Independent scan oracle: bisection for the constraint boundary, then
// candidate enumeration with the largest-rho tie break.
double rho_oracle(const Vector& g_train, const Vector& g_test, double c, double gamma,
                  double n_k) {
  const double budget = n_k * gamma;
  auto cons = [&](double rho) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < g_train.size(); ++i) s += std::max(0.0, 1.0 - g_train[i] + rho);
    return s;
  };
  auto obj = [&](double rho) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < g_test.size(); ++j) s += std::max(0.0, 1.0 + g_test[j] - rho);
    return -rho + c * s;
  };
  double lo = g_train.minCoeff() - 1.0, hi = g_train.maxCoeff() + budget + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cons(mid) <= budget ? lo : hi) = mid;
  }
  std::vector<double> cand;
  for (Eigen::Index i = 0; i < g_train.size(); ++i) cand.push_back(g_train[i] - 1.0);
  for (Eigen::Index j = 0; j < g_test.size(); ++j) cand.push_back(g_test[j] + 1.0);
  cand.push_back(lo);
  double best_rho = lo, best = obj(lo);
  for (double rho : cand) {
    if (cons(rho) > budget + 1e-10) continue;
    const double o = obj(rho);
    if (o < best - 1e-12 || (std::abs(o - best) <= 1e-12 && rho > best_rho)) {
      best = o;
      best_rho = rho;
    }
  }
  return best_rho;
}

}  // namespace

TEST_CASE("recover_rho worked instances") {
  Vector gt(1), gs(1);
  gt << 1.0;
  gs << -1.0;
  CHECK(recover_rho(gt, gs, 1.0, 0.05, 1.0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(recover_rho(gt, gs, 1.0, 0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("recover_rho matches the breakpoint-scan oracle and stays feasible") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ug(0.0, 0.4);
  std::uniform_int_distribution<int> usz(1, 12);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = usz(rng), m = usz(rng);
    Vector gt(n), gs(m);
    for (int i = 0; i < n; ++i) gt[i] = nd(rng);
    for (int j = 0; j < m; ++j) gs[j] = nd(rng);
    const double gamma = ug(rng);
    const double c = 0.1 + ug(rng);
    const double rho = recover_rho(gt, gs, c, gamma, static_cast<double>(n));
    const double oracle = rho_oracle(gt, gs, c, gamma, static_cast<double>(n));
    CHECK(rho == doctest::Approx(oracle).epsilon(1e-9));
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::max(0.0, 1.0 - gt[i] + rho);
    CHECK(s <= static_cast<double>(n) * gamma + 1e-10);
  }
}

TEST_CASE("smooth constrained solver on box-constrained quadratics") {
  SmoothConstrainedProblem p;
  p.objective = [](const Vector& x, Vector& g) {
    g.resize(1);
    g[0] = x[0] - 1.0;
    return 0.5 * x[0] * x[0] - x[0];
  };
  p.constraint = [](const Vector& x, Vector& g) {
    g.resize(1);
    g[0] = 0.0;
    return -1.0;  // never active
  };
  p.constraint_bound = 0.0;
  p.lower = Vector::Zero(1);
  p.upper = Vector::Constant(1, 10.0);

  Vector start = Vector::Zero(1);
  auto [x, rep] = solve_smooth_constrained(p, start);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-5));

  p.upper[0] = 0.5;
  auto [x2, rep2] = solve_smooth_constrained(p, start);
  CHECK(x2[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("smooth constrained solver matches a dense grid on a 2-d constrained problem") {
  // min (x-2)^2 + (y+1)^2  s.t.  x + y <= 0.5, box [-2, 2]^2
  SmoothConstrainedProblem p;
  p.objective = [](const Vector& v, Vector& g) {
    g.resize(2);
    g[0] = 2.0 * (v[0] - 2.0);
    g[1] = 2.0 * (v[1] + 1.0);
    return (v[0] - 2.0) * (v[0] - 2.0) + (v[1] + 1.0) * (v[1] + 1.0);
  };
  p.constraint = [](const Vector& v, Vector& g) {
    g.resize(2);
    g << 1.0, 1.0;
    return v[0] + v[1];
  };
  p.constraint_bound = 0.5;
  p.lower = Vector::Constant(2, -2.0);
  p.upper = Vector::Constant(2, 2.0);

  Vector start = Vector::Zero(2);
  auto [x, rep] = solve_smooth_constrained(p, start);
  CHECK(rep.status == SolverStatus::converged);

  double best = kInf;
  Vector best_xy(2);
  for (double a = -2.0; a <= 2.0; a += 1e-3) {
    const double b_max = std::min(2.0, 0.5 - a);
    for (double b : {b_max, -1.0}) {
      if (b < -2.0 || a + b > 0.5 + 1e-12) continue;
      const double v = (a - 2.0) * (a - 2.0) + (b + 1.0) * (b + 1.0);
      if (v < best) {
        best = v;
        best_xy << a, b;
      }
    }
  }
  CHECK(std::abs(x[0] - best_xy[0]) <= 2e-3);
  CHECK(std::abs(x[1] - best_xy[1]) <= 2e-3);
}
