#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gps/types.hpp"

namespace gps {

/// One evaluated test point: true label (-1 = outlier) and predicted set.
struct EvalRecord {
  int true_label = 0;
  std::vector<int> predicted_set;  // class ids, subset of 0..K-1
};

/// Metrics with explicit NA for empty denominators; an undefined metric
/// never contributes to replication means.
struct MetricsReport {
  std::vector<std::optional<double>> coverage;  // per class
  std::optional<double> cardinality;
  std::optional<double> conditional_cardinality;
  std::optional<double> detection_rate;
  std::vector<long> class_counts;  // denominator per class
  long non_outlier_count = 0;
  long outlier_count = 0;
};

MetricsReport compute_metrics(const std::vector<EvalRecord>& records, int num_classes);

/// Mean and standard error (population sd / sqrt(R)) over replications,
/// skipping NA values. se is NA when fewer than 2 defined values exist.
struct Replicated {
  std::optional<double> mean;
  std::optional<double> se;
  long count = 0;
};
Replicated replicate(const std::vector<std::optional<double>>& values);

/// Serialization of an optional metric: value or the NA token.
std::string metric_to_string(const std::optional<double>& v);

/// One scree-table cell. Rows are ordered by (gamma, method, metric).
struct SweepCell {
  double gamma = 0.0;
  std::string method;
  std::string metric;
  std::optional<double> value;
  std::optional<double> se;
  std::string error;  // nonempty when the callback failed for this cell
};

/// Runs the fit-and-eval callback per (gamma, method) and flattens the
/// reports into plot-ready rows. Callback errors are recorded per cell
/// and do not abort the remaining grid.
std::vector<SweepCell> gamma_sweep(
    const std::function<MetricsReport(double gamma, const std::string& method)>& fit_and_eval,
    const std::vector<double>& gammas, const std::vector<std::string>& methods);

/// CSV with header gamma,method,metric,value,se.
std::string sweep_to_csv(const std::vector<SweepCell>& cells);

}  // namespace gps
