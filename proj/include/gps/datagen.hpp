#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gps/types.hpp"

namespace gps {

/// Feature rows with integer labels; kOutlierLabel marks outlier rows.
/// label_names maps label id -> display name for CSV round trips.
struct LabeledSet {
  Matrix features;                       // N x p
  std::vector<int> labels;               // N entries
  std::vector<std::string> label_names;  // size K
  std::string provenance;                // "train" or "test"

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  int num_classes() const { return static_cast<int>(label_names.size()); }
  /// Rows of one class (or the outliers for kOutlierLabel).
  Matrix rows_with_label(int label) const;
};

enum class SimExample { ex1, ex2 };

struct SimSpec {
  SimExample example = SimExample::ex1;
  long n_per_class = 500;
  long n_outlier = 200;
  std::uint64_t seed = 1;
};

/// Per-class sampling parameters drawn for one Example 1 replication.
struct Example1Params {
  std::array<Vector, 4> mu;          // 2-d means
  std::array<Matrix, 4> sqrt_sigma;  // 2x2 square roots of the covariances
};

struct SimulatedData {
  LabeledSet train;  // no outlier rows
  LabeledSet test;   // includes the outlier class
};

/// Example 1: four 2-d gaussian classes plus an outlier mixture of four
/// uniform rectangles, padded with eight N(0, 0.1) noise coordinates
/// (p = 10). The rectangle placement keeps the outlier mass away from
/// the class ellipses; see the README for the exact coordinates.
std::pair<Example1Params, SimulatedData> generate_example1(const SimSpec& spec);

/// Example 2: three annular classes from radius-angle pairs with outlier
/// radii in [15, 20], padded with 98 N(0, 1) noise coordinates (p = 100).
SimulatedData generate_example2(const SimSpec& spec);

SimulatedData generate(const SimSpec& spec);

/// CSV with a header row; the label column holds class names, with
/// outlier_token marking outlier rows. Throws ParseError with a line
/// number on malformed input.
LabeledSet load_csv(const std::string& path, const std::string& label_column = "label",
                    const std::string& outlier_token = "Outlier");

void save_csv(const std::string& path, const LabeledSet& data,
              const std::string& outlier_token = "Outlier");

/// Seeded subsampling without replacement: per-class training sizes,
/// remainder of the normal classes plus every outlier row go to test.
std::pair<LabeledSet, LabeledSet> subsample_protocol(const LabeledSet& full,
                                                     const std::vector<long>& per_class_sizes,
                                                     std::uint64_t seed);

}  // namespace gps
