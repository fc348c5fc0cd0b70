#pragma once

#include "gps/types.hpp"

namespace gps {

enum class LossKind { hinge, huberized };

/// Convex surrogate losses upper-bounding the 0-1 loss 1{u < 0}.
/// hinge:      max(0, 1 - u)
/// huberized:  1 - u                 for u <= 1 - delta
///             (1 - u + delta)^2/(4 delta)  for 1 - delta < u <= 1 + delta
///             0                     for u > 1 + delta
struct LossSpec {
  LossKind kind = LossKind::hinge;
  double delta = 0.1;  // huberized half-width, in (0, 1)

  static LossSpec hinge();
  static LossSpec huberized(double delta = 0.1);
};

double loss(const LossSpec& spec, double u);

/// Derivative of the huberized loss (continuous at both knots).
/// Throws InputError for the hinge loss, whose kink makes it unusable
/// in the smooth optimization paths.
double loss_grad(const LossSpec& spec, double u);

}  // namespace gps
