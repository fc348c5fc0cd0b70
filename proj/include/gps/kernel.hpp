#pragma once

#include <vector>

#include "gps/types.hpp"

namespace gps {

enum class KernelFamily { gaussian, linear };

/// Kernel family plus bandwidth. The gaussian form is
/// K(x, x') = exp(-||x - x'||^2 / sigma^2).
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double sigma = 1.0;  // gaussian only, > 0

  static KernelSpec gaussian(double sigma);
  static KernelSpec linear();
};

/// Per-feature weight vector d with the box constraint 0 <= d_t <= 1.
/// Points are weighted elementwise before kernel evaluation.
struct WeightVector {
  Vector d;

  static WeightVector ones(Eigen::Index p);
  Eigen::Index size() const { return d.size(); }
  void validate() const;  // throws InputError if the box is violated
};

/// Gram blocks of the class-k dual problem: train/train, test/test, train/test.
struct GramBlocks {
  Matrix train_train;  // n_k x n_k
  Matrix test_test;    // m x m
  Matrix train_test;   // n_k x m
};

/// K(d o x, d o x'). Rows of all point matrices are observations.
double eval_weighted(const KernelSpec& kernel, const WeightVector& d,
                     const Vector& x, const Vector& x_prime);

GramBlocks gram_blocks(const KernelSpec& kernel, const WeightVector& d,
                       const Matrix& train_pts, const Matrix& test_pts);

/// Full Gram matrix over one point set (rows = points).
Matrix gram_matrix(const KernelSpec& kernel, const WeightVector& d, const Matrix& pts);

/// Cross-Gram: K_d(a_i, b_j), |a| x |b|.
Matrix cross_gram(const KernelSpec& kernel, const WeightVector& d,
                  const Matrix& a, const Matrix& b);

/// Gradient of the weighted gaussian kernel with respect to d.
/// Component t is K_d(x, x') * (-2 d_t (x_t - x'_t)^2 / sigma^2).
/// Throws InputError for the linear kernel.
Vector grad_d(const KernelSpec& kernel, const WeightVector& d,
              const Vector& x, const Vector& x_prime);

/// Bandwidth candidates: the requested percentiles (0..100, linear
/// interpolation between order statistics) of all pairwise weighted
/// euclidean distances ||d o (x - x')||.
/// Throws InputError when every pairwise distance is zero.
std::vector<double> bandwidth_candidates(const Matrix& points, const WeightVector& d,
                                         const std::vector<double>& percentiles);

/// Appendix-style default percentile grid for sigma selection.
const std::vector<double>& default_bandwidth_percentiles();

}  // namespace gps
