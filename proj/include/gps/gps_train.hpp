#pragma once

#include <optional>
#include <vector>

#include "gps/kernel.hpp"
#include "gps/solver.hpp"
#include "gps/types.hpp"

namespace gps {

/// Constants of the theoretical deviation bound used for the optional
/// gamma tightening: r(zeta) = (sqrt(2) s + 2) c kappa (2 + 3 sqrt(2 ln(2/zeta))).
struct TheoryParams {
  double s = 1.0;      // hypothesis-complexity radius
  double s_prime = 1.0;
  double c = 1.0;      // loss Lipschitz constant
  double kappa = 1.0;  // kernel sup-norm
  double zeta = 0.05;  // confidence level, in (0,1)
};

/// epsilon = r(zeta) / sqrt(n1).
double gamma_adjustment(const TheoryParams& params, long n1);

struct ClassTrainingInput {
  Matrix train_pts;  // n_k x p, class-k rows
  Matrix test_pts;   // m x p, unlabeled test-subset rows
  double gamma = 0.05;
  double c_bound = 1.0;  // C = (lambda m)^-1
  KernelSpec kernel;
  WeightVector d;  // all-ones for plain GPS
  // Opt-in constraint tightening by gamma - epsilon, clipped below at 0.1*gamma.
  std::optional<TheoryParams> gamma_adjust;

  void validate() const;
};

/// Per-class scoring rule f(x) = sum_i coef_i K_d(x, s_i) - rho with the
/// referenced train/test rows stored as supports.
struct DecisionFunction {
  Matrix supports;      // rows actually referenced after pruning
  Vector coefficients;  // +alpha on train supports, -beta on test supports
  double rho = 0.0;
  KernelSpec kernel;
  WeightVector d;

  double score(const Vector& x) const;
  Vector score_rows(const Matrix& pts) const;
};

/// Assembles and solves the class-k dual, recovers rho, and packages the
/// decision function. Coefficients below 1e-8 in magnitude are pruned.
DecisionFunction train_gps(const ClassTrainingInput& input, double tol = 1e-6);

/// Trains every class; output order matches input order regardless of the
/// parallelism degree. Any per-class failure aborts with an aggregate
/// error naming the failing classes.
std::vector<DecisionFunction> train_all_classes(const std::vector<ClassTrainingInput>& inputs,
                                                int parallelism = 1);

}  // namespace gps
