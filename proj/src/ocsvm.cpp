#include "gps/ocsvm.hpp"

#include <cmath>
#include <limits>

#include "gps/qp.hpp"

namespace gps {

DecisionFunction train_ocsvm(const Matrix& points, const OcsvmConfig& config, double tol) {
  const Eigen::Index m = points.rows();
  if (m < 2) throw InputError("train_ocsvm needs at least 2 points");
  if (!(config.nu > 0.0 && config.nu <= 1.0)) throw InputError("ocsvm nu must lie in (0,1]");
  const double cap = 1.0 / (static_cast<double>(m) * config.nu);

  const WeightVector ones = WeightVector::ones(points.cols());
  Matrix gram = gram_matrix(config.kernel, ones, points);

  QpSpec spec;
  spec.P = gram;
  spec.q = Vector::Zero(m);
  spec.A = Matrix::Zero(m + 1, m);
  spec.A.topRows(m).setIdentity();
  spec.A.row(m).setConstant(1.0);
  spec.lower = Vector::Zero(m + 1);
  spec.upper = Vector::Constant(m + 1, cap);
  spec.lower[m] = spec.upper[m] = 1.0;

  QpResult qp = solve_qp(spec, tol);
  if (qp.report.status == SolverStatus::infeasible)
    throw TrainingError("ocsvm dual reported infeasible");
  Vector alpha = qp.x.cwiseMax(0.0).cwiseMin(cap);

  // rho = w'Phi(x_i) averaged over margin support vectors; when every
  // coefficient sits at a bound (nu = 1), fall back to the support mean.
  const Vector scores = gram * alpha;
  double rho = 0.0;
  long margin = 0;
  const double edge = 1e-6 * cap;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (alpha[i] > edge && alpha[i] < cap - edge) {
      rho += scores[i];
      ++margin;
    }
  }
  if (margin > 0) {
    rho /= static_cast<double>(margin);
  } else {
    double sum = 0.0;
    long count = 0;
    for (Eigen::Index i = 0; i < m; ++i)
      if (alpha[i] > edge) {
        sum += scores[i];
        ++count;
      }
    rho = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }

  constexpr double kPrune = 1e-8;
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (alpha[i] > kPrune) ++kept;
  DecisionFunction f;
  f.supports.resize(kept, points.cols());
  f.coefficients.resize(kept);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (alpha[i] > kPrune) {
      f.supports.row(r) = points.row(i);
      f.coefficients[r++] = alpha[i];
    }
  }
  f.rho = rho;
  f.kernel = config.kernel;
  f.d = ones;
  return f;
}

}  // namespace gps
