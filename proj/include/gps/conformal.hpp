#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gps/datagen.hpp"
#include "gps/gps_train.hpp"
#include "gps/gpskfs.hpp"
#include "gps/types.hpp"

namespace gps {

enum class Method { gps, gpskfs, ocsvm };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct FitConfig {
  double gamma = 0.05;
  double c_bound = 1.0;  // GPS regularization C
  double c1 = 1.0;       // GPSKFS loss weight
  double c2 = 0.1;       // GPSKFS l1 weight
  double sigma = 0.0;    // <= 0 selects the median pairwise-distance heuristic
  KernelFamily family = KernelFamily::gaussian;
  long m_max = 500;           // cap on the shared unlabeled test subset
  double split_ratio = 0.5;   // train share of the per-class conformal split
  std::uint64_t seed = 1;
  int jobs = 1;
  std::optional<TheoryParams> gamma_adjust;
  GpskfsOptions kfs_options;
  // gpskfs only: after learning the feature weights, re-estimate the
  // bandwidth from the d-weighted pairwise distances and retrain starting
  // from the learned weights, at most this many times. Skipped when the
  // bandwidth is explicit (sigma > 0) or barely changes.
  int sigma_refits = 1;
  // percentile of the weighted pairwise distances used by the refit
  double sigma_refit_percentile = 50.0;
};

/// Disjoint per-class train/calibration index sets over the class sample.
struct SplitPlan {
  std::vector<std::vector<Eigen::Index>> train_idx;  // per class, into the full set
  std::vector<std::vector<Eigen::Index>> calib_idx;
  std::uint64_t seed = 0;
};

SplitPlan make_split_plan(const LabeledSet& data, double train_ratio, std::uint64_t seed);

/// Order-statistic threshold: tau = k*-th smallest score with
/// k* = floor(gamma * (n+1)); -inf when k* < 1 (accept everything).
double calibrate_threshold(std::vector<double> scores, double gamma);

/// K decision functions plus conformal thresholds. prediction(x) =
/// {k : f_k(x) >= tau_k}; the empty set flags an outlier.
struct SetValuedModel {
  std::string method;
  double gamma = 0.0;
  std::vector<DecisionFunction> decisions;
  std::vector<double> taus;
  std::vector<std::string> class_names;

  int num_classes() const { return static_cast<int>(decisions.size()); }
  std::vector<int> predict_set(const Vector& x) const;
};

struct FitResult {
  SetValuedModel model;
  std::vector<Eigen::Index> test_subset;  // rows of the test pool used in training
};

/// Per class: conformal split, training on the training part (GPS and
/// GPSKFS against the shared unlabeled test subset), calibration scores,
/// threshold. Every class needs at least 4 points.
FitResult fit_conformal(const LabeledSet& train_data, const Matrix& test_pool, Method method,
                        const FitConfig& config);

/// Recalibrates the thresholds of a fitted model at a new gamma using the
/// provided calibration scores (one vector per class). Training scores
/// stay fixed, so prediction sets are nested across gamma.
void recalibrate(SetValuedModel& model, const std::vector<std::vector<double>>& calib_scores,
                 double gamma);

/// Calibration scores of a fitted model under a split plan (used by
/// tuning and threshold recalibration).
std::vector<std::vector<double>> calibration_scores(const SetValuedModel& model,
                                                    const LabeledSet& train_data,
                                                    const SplitPlan& plan);

/// Versioned text model file; scores round-trip to 1e-12.
void save_model(const std::string& path, const SetValuedModel& model);
SetValuedModel load_model(const std::string& path);

}  // namespace gps
