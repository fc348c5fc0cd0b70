#include "gps/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace gps {

KernelSpec KernelSpec::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw InputError("gaussian kernel requires sigma > 0");
  return KernelSpec{KernelFamily::gaussian, sigma};
}

KernelSpec KernelSpec::linear() { return KernelSpec{KernelFamily::linear, 0.0}; }

WeightVector WeightVector::ones(Eigen::Index p) {
  WeightVector w;
  w.d = Vector::Ones(p);
  return w;
}

void WeightVector::validate() const {
  for (Eigen::Index t = 0; t < d.size(); ++t) {
    if (!(d[t] >= 0.0 && d[t] <= 1.0))
      throw InputError("weight vector outside the box [0,1] at index " + std::to_string(t));
  }
}

namespace {

double weighted_sqdist(const WeightVector& d, const Vector& x, const Vector& y) {
  double s = 0.0;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const double diff = d.d[t] * (x[t] - y[t]);
    s += diff * diff;
  }
  return s;
}

void check_dims(const WeightVector& d, const Vector& x, const Vector& y) {
  if (x.size() != y.size() || x.size() != d.size())
    throw InputError("kernel evaluation: dimension mismatch");
}

}  // namespace

double eval_weighted(const KernelSpec& kernel, const WeightVector& d,
                     const Vector& x, const Vector& x_prime) {
  check_dims(d, x, x_prime);
  switch (kernel.family) {
    case KernelFamily::gaussian:
      return std::exp(-weighted_sqdist(d, x, x_prime) / (kernel.sigma * kernel.sigma));
    case KernelFamily::linear: {
      double s = 0.0;
      for (Eigen::Index t = 0; t < x.size(); ++t) s += d.d[t] * x[t] * d.d[t] * x_prime[t];
      return s;
    }
  }
  throw InputError("unknown kernel family");
}

Matrix gram_matrix(const KernelSpec& kernel, const WeightVector& d, const Matrix& pts) {
  const Eigen::Index n = pts.rows();
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = eval_weighted(kernel, d, pts.row(i), pts.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Matrix cross_gram(const KernelSpec& kernel, const WeightVector& d,
                  const Matrix& a, const Matrix& b) {
  Matrix g(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      g(i, j) = eval_weighted(kernel, d, a.row(i), b.row(j));
  return g;
}

GramBlocks gram_blocks(const KernelSpec& kernel, const WeightVector& d,
                       const Matrix& train_pts, const Matrix& test_pts) {
  if (train_pts.rows() == 0 || test_pts.rows() == 0)
    throw InputError("gram_blocks: empty point set");
  GramBlocks blocks;
  blocks.train_train = gram_matrix(kernel, d, train_pts);
  blocks.test_test = gram_matrix(kernel, d, test_pts);
  blocks.train_test = cross_gram(kernel, d, train_pts, test_pts);
  return blocks;
}

Vector grad_d(const KernelSpec& kernel, const WeightVector& d,
              const Vector& x, const Vector& x_prime) {
  if (kernel.family != KernelFamily::gaussian)
    throw InputError("grad_d is defined for the gaussian kernel only");
  check_dims(d, x, x_prime);
  const double k = eval_weighted(kernel, d, x, x_prime);
  const double inv_s2 = 1.0 / (kernel.sigma * kernel.sigma);
  Vector g(x.size());
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const double diff = x[t] - x_prime[t];
    g[t] = k * (-2.0 * d.d[t] * diff * diff * inv_s2);
  }
  return g;
}

namespace {

// Percentile with linear interpolation between order statistics,
// matching the common statistical convention.
double percentile_sorted(const std::vector<double>& sorted, double pct) {
  const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> bandwidth_candidates(const Matrix& points, const WeightVector& d,
                                         const std::vector<double>& percentiles) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw InputError("bandwidth_candidates requires at least 2 points");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      dist.push_back(std::sqrt(weighted_sqdist(d, points.row(i), points.row(j))));
  std::sort(dist.begin(), dist.end());
  if (dist.back() == 0.0)
    throw InputError("bandwidth_candidates: all pairwise distances are zero");
  std::vector<double> out;
  out.reserve(percentiles.size());
  for (double p : percentiles) out.push_back(percentile_sorted(dist, p));
  return out;
}

const std::vector<double>& default_bandwidth_percentiles() {
  static const std::vector<double> p{25.0, 37.5, 50.0, 62.5, 75.0};
  return p;
}

}  // namespace gps
