#pragma once

#include "gps/gps_train.hpp"
#include "gps/kernel.hpp"
#include "gps/types.hpp"

namespace gps {

struct OcsvmConfig {
  double nu = 0.05;  // in (0, 1]
  KernelSpec kernel;
};

/// One-class SVM via the standard dual
///   min 1/2 a'Ga  s.t.  0 <= a_i <= 1/(m nu),  sum a_i = 1,
/// with rho recovered from the margin support vectors. Returns
/// f(x) = sum_i a_i K(x, x_i) - rho as a DecisionFunction (unit weights).
DecisionFunction train_ocsvm(const Matrix& points, const OcsvmConfig& config,
                             double tol = 1e-6);

}  // namespace gps
