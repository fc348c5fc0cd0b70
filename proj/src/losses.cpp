#include "gps/losses.hpp"

#include <algorithm>

namespace gps {

LossSpec LossSpec::hinge() { return LossSpec{LossKind::hinge, 0.0}; }

LossSpec LossSpec::huberized(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("huberized loss requires delta in (0,1)");
  return LossSpec{LossKind::huberized, delta};
}

double loss(const LossSpec& spec, double u) {
  switch (spec.kind) {
    case LossKind::hinge:
      return std::max(0.0, 1.0 - u);
    case LossKind::huberized: {
      const double d = spec.delta;
      if (u <= 1.0 - d) return 1.0 - u;
      if (u <= 1.0 + d) {
        const double t = 1.0 - u + d;
        return t * t / (4.0 * d);
      }
      return 0.0;
    }
  }
  throw InputError("unknown loss kind");
}

double loss_grad(const LossSpec& spec, double u) {
  if (spec.kind != LossKind::huberized)
    throw InputError("loss_grad is defined for the huberized loss only");
  const double d = spec.delta;
  if (u <= 1.0 - d) return -1.0;
  if (u <= 1.0 + d) return -(1.0 - u + d) / (2.0 * d);
  return 0.0;
}

}  // namespace gps
