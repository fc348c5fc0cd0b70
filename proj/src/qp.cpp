#include "gps/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vector& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

struct Residuals {
  double primal;
  double dual;
};

Residuals kkt_residuals(const QpSpec& s, const Vector& x, const Vector& y) {
  Vector ax = s.A * x;
  Vector viol(ax.size());
  for (Eigen::Index i = 0; i < ax.size(); ++i)
    viol[i] = std::max(0.0, s.lower[i] - ax[i]) + std::max(0.0, ax[i] - s.upper[i]);
  Vector stat = s.P * x + s.q + s.A.transpose() * y;
  return {inf_norm(viol), inf_norm(stat)};
}

// Equality-constrained KKT solve on the guessed active set. Returns false
// when the refined point is not an improvement.
bool polish(const QpSpec& s, double tol, Vector& x, Vector& y) {
  const Eigen::Index n = x.size();
  const Vector ax = s.A * x;
  std::vector<Eigen::Index> active;
  std::vector<double> rhs_act;
  const double act_tol = std::sqrt(tol);
  for (Eigen::Index i = 0; i < ax.size(); ++i) {
    if (s.lower[i] == s.upper[i]) {
      active.push_back(i);
      rhs_act.push_back(s.lower[i]);
    } else if (std::isfinite(s.lower[i]) && ax[i] - s.lower[i] < act_tol && y[i] < act_tol) {
      active.push_back(i);
      rhs_act.push_back(s.lower[i]);
    } else if (std::isfinite(s.upper[i]) && s.upper[i] - ax[i] < act_tol && y[i] > -act_tol) {
      active.push_back(i);
      rhs_act.push_back(s.upper[i]);
    }
  }
  const auto na = static_cast<Eigen::Index>(active.size());
  Matrix kkt = Matrix::Zero(n + na, n + na);
  kkt.topLeftCorner(n, n) = s.P;
  kkt.topLeftCorner(n, n).diagonal().array() += 1e-12;
  for (Eigen::Index r = 0; r < na; ++r) {
    kkt.block(n + r, 0, 1, n) = s.A.row(active[static_cast<std::size_t>(r)]);
    kkt.block(0, n + r, n, 1) = s.A.row(active[static_cast<std::size_t>(r)]).transpose();
    kkt(n + r, n + r) = -1e-12;
  }
  Vector rhs(n + na);
  rhs.head(n) = -s.q;
  for (Eigen::Index r = 0; r < na; ++r) rhs[n + r] = rhs_act[static_cast<std::size_t>(r)];

  Eigen::PartialPivLU<Matrix> lu(kkt);
  Vector sol = lu.solve(rhs);
  // one round of iterative refinement
  Vector resid = rhs - kkt * sol;
  sol += lu.solve(resid);

  Vector x_new = sol.head(n);
  Vector y_new = Vector::Zero(s.A.rows());
  for (Eigen::Index r = 0; r < na; ++r) y_new[active[static_cast<std::size_t>(r)]] = sol[n + r];

  const Residuals before = kkt_residuals(s, x, y);
  const Residuals after = kkt_residuals(s, x_new, y_new);
  if (std::max(after.primal, after.dual) <= std::max({before.primal, before.dual, tol})) {
    x = x_new;
    y = y_new;
    return true;
  }
  return false;
}

}  // namespace

QpResult solve_qp(const QpSpec& spec, double tol, int max_iter) {
  const Eigen::Index n = spec.q.size();
  const Eigen::Index m = spec.lower.size();
  if (spec.P.rows() != n || spec.P.cols() != n || spec.A.rows() != m || spec.A.cols() != n ||
      spec.upper.size() != m)
    throw InputError("solve_qp: inconsistent problem dimensions");
  for (Eigen::Index i = 0; i < m; ++i)
    if (spec.lower[i] > spec.upper[i]) {
      QpResult res;
      res.x = Vector::Zero(n);
      res.y = Vector::Zero(m);
      res.report.status = SolverStatus::infeasible;
      return res;
    }

  const double sigma = 1e-6;
  const double relax = 1.6;
  double rho_base = 0.1;

  Vector x = Vector::Zero(n);
  Vector z = Vector::Zero(m);
  Vector y = Vector::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i)
    z[i] = std::clamp(0.0, spec.lower[i], spec.upper[i]);

  auto rho_of = [&](Eigen::Index i) {
    return spec.lower[i] == spec.upper[i] ? 1e3 * rho_base : rho_base;
  };

  Eigen::LLT<Matrix> llt;
  auto refactor = [&]() {
    Matrix M = spec.P;
    M.diagonal().array() += sigma;
    for (Eigen::Index i = 0; i < m; ++i)
      M.noalias() += rho_of(i) * spec.A.row(i).transpose() * spec.A.row(i);
    llt.compute(M);
  };
  refactor();

  QpResult res;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    Vector rhs = sigma * x - spec.q;
    for (Eigen::Index i = 0; i < m; ++i)
      rhs.noalias() += spec.A.row(i).transpose() * (rho_of(i) * z[i] - y[i]);
    Vector x_t = llt.solve(rhs);
    Vector z_t = spec.A * x_t;

    x = relax * x_t + (1.0 - relax) * x;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double zi = relax * z_t[i] + (1.0 - relax) * z[i];
      const double z_new = std::clamp(zi + y[i] / rho_of(i), spec.lower[i], spec.upper[i]);
      y[i] += rho_of(i) * (zi - z_new);
      z[i] = z_new;
    }

    if (iter % 25 == 0) {
      const Residuals r = kkt_residuals(spec, x, y);
      if (r.primal <= tol && r.dual <= tol) {
        ++iter;
        break;
      }
      // re-balance the penalty when the residuals drift apart
      if (iter > 0 && iter % 100 == 0 && r.dual > 0 && r.primal > 0) {
        const double ratio = std::sqrt(r.primal / r.dual);
        if (ratio > 5.0 || ratio < 0.2) {
          rho_base *= std::clamp(ratio, 1e-3, 1e3);
          refactor();
        }
      }
    }
  }

  polish(spec, tol, x, y);

  const Residuals r = kkt_residuals(spec, x, y);
  res.x = x;
  res.y = y;
  res.report.objective = 0.5 * x.dot(spec.P * x) + spec.q.dot(x);
  res.report.primal_residual = r.primal;
  res.report.dual_residual = r.dual;
  res.report.iterations = iter;
  res.report.status = (r.primal <= tol && r.dual <= tol) ? SolverStatus::converged
                                                         : SolverStatus::max_iter;
  return res;
}

}  // namespace gps
