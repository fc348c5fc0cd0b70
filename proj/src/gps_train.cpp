#include "gps/gps_train.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace gps {

double gamma_adjustment(const TheoryParams& params, long n1) {
  if (n1 < 1) throw InputError("gamma_adjustment: n1 must be at least 1");
  if (!(params.zeta > 0.0 && params.zeta < 1.0))
    throw InputError("gamma_adjustment: zeta must lie in (0,1)");
  const double r = (std::sqrt(2.0) * params.s + 2.0) * params.c * params.kappa *
                   (2.0 + 3.0 * std::sqrt(2.0 * std::log(2.0 / params.zeta)));
  return r / std::sqrt(static_cast<double>(n1));
}

void ClassTrainingInput::validate() const {
  if (train_pts.rows() < 2) throw InputError("class training input needs at least 2 train points");
  if (test_pts.rows() < 2) throw InputError("class training input needs at least 2 test points");
  if (train_pts.cols() != test_pts.cols())
    throw InputError("train/test feature dimensions disagree");
  if (d.size() != train_pts.cols()) throw InputError("weight vector dimension disagrees with data");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0,1)");
  if (!(c_bound > 0.0)) throw InputError("C must be positive");
  d.validate();
}

double DecisionFunction::score(const Vector& x) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < supports.rows(); ++i)
    s += coefficients[i] * eval_weighted(kernel, d, x, supports.row(i));
  return s - rho;
}

Vector DecisionFunction::score_rows(const Matrix& pts) const {
  if (pts.cols() != supports.cols() && supports.rows() > 0)
    throw InputError("score: feature dimension disagrees with model");
  Vector out(pts.rows());
  for (Eigen::Index r = 0; r < pts.rows(); ++r) out[r] = score(pts.row(r));
  return out;
}

namespace {

double effective_gamma(const ClassTrainingInput& input) {
  if (!input.gamma_adjust) return input.gamma;
  const double eps = gamma_adjustment(*input.gamma_adjust, input.train_pts.rows());
  return std::max(0.1 * input.gamma, input.gamma - eps);
}

DecisionFunction package(const ClassTrainingInput& input, const DualSolution& sol, double rho) {
  constexpr double kPrune = 1e-8;
  const Eigen::Index n = input.train_pts.rows();
  const Eigen::Index m = input.test_pts.rows();
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(sol.alpha[i]) > kPrune) ++kept;
  for (Eigen::Index j = 0; j < m; ++j)
    if (std::abs(sol.beta[j]) > kPrune) ++kept;

  DecisionFunction f;
  f.supports.resize(kept, input.train_pts.cols());
  f.coefficients.resize(kept);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(sol.alpha[i]) > kPrune) {
      f.supports.row(r) = input.train_pts.row(i);
      f.coefficients[r++] = sol.alpha[i];
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (std::abs(sol.beta[j]) > kPrune) {
      f.supports.row(r) = input.test_pts.row(j);
      f.coefficients[r++] = -sol.beta[j];
    }
  }
  f.rho = rho;
  f.kernel = input.kernel;
  f.d = input.d;
  return f;
}

}  // namespace

DecisionFunction train_gps(const ClassTrainingInput& input, double tol) {
  input.validate();
  const double gamma = effective_gamma(input);

  GramBlocks blocks = gram_blocks(input.kernel, input.d, input.train_pts, input.test_pts);
  QpProblem qp{blocks.train_train, blocks.test_test, blocks.train_test, gamma, input.c_bound};
  auto [sol, report] = solve_dual_qp(qp, tol);
  if (report.status == SolverStatus::infeasible)
    throw TrainingError("dual QP reported infeasible (objective " +
                        std::to_string(report.objective) + ", " +
                        std::to_string(report.iterations) + " iterations)");

  const Vector g_train = blocks.train_train * sol.alpha - blocks.train_test * sol.beta;
  const Vector g_test =
      blocks.train_test.transpose() * sol.alpha - blocks.test_test * sol.beta;
  const double rho = recover_rho(g_train, g_test, input.c_bound, gamma,
                                 static_cast<double>(input.train_pts.rows()));
  return package(input, sol, rho);
}

std::vector<DecisionFunction> train_all_classes(const std::vector<ClassTrainingInput>& inputs,
                                                int parallelism) {
  if (inputs.empty()) throw InputError("train_all_classes: no inputs");
  const int jobs = std::max(1, parallelism);
  std::vector<DecisionFunction> out(inputs.size());
  std::vector<std::string> failures(inputs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= inputs.size()) return;
      try {
        out[k] = train_gps(inputs[k]);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::string message;
  for (std::size_t k = 0; k < failures.size(); ++k)
    if (!failures[k].empty())
      message += "class " + std::to_string(k + 1) + ": " + failures[k] + "; ";
  if (!message.empty()) throw TrainingError("per-class training failed: " + message);
  return out;
}

}  // namespace gps
