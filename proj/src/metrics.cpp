#include "gps/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gps {

MetricsReport compute_metrics(const std::vector<EvalRecord>& records, int num_classes) {
  if (records.empty()) throw InputError("compute_metrics: no records");
  MetricsReport report;
  report.class_counts.assign(static_cast<std::size_t>(num_classes), 0);
  std::vector<long> covered(static_cast<std::size_t>(num_classes), 0);

  long set_size_sum = 0;
  long non_outlier_size_sum = 0;
  long detected = 0;
  for (const EvalRecord& rec : records) {
    for (int lab : rec.predicted_set)
      if (lab < 0 || lab >= num_classes)
        throw InputError("compute_metrics: predicted label outside [0,K)");
    const long sz = static_cast<long>(rec.predicted_set.size());
    set_size_sum += sz;
    if (rec.true_label == kOutlierLabel) {
      ++report.outlier_count;
      if (sz == 0) ++detected;
    } else {
      ++report.non_outlier_count;
      non_outlier_size_sum += sz;
      const auto k = static_cast<std::size_t>(rec.true_label);
      ++report.class_counts[k];
      if (std::find(rec.predicted_set.begin(), rec.predicted_set.end(), rec.true_label) !=
          rec.predicted_set.end())
        ++covered[k];
    }
  }

  report.coverage.resize(static_cast<std::size_t>(num_classes));
  for (std::size_t k = 0; k < report.coverage.size(); ++k) {
    if (report.class_counts[k] > 0)
      report.coverage[k] = static_cast<double>(covered[k]) / static_cast<double>(report.class_counts[k]);
  }
  report.cardinality = static_cast<double>(set_size_sum) / static_cast<double>(records.size());
  if (report.non_outlier_count > 0)
    report.conditional_cardinality =
        static_cast<double>(non_outlier_size_sum) / static_cast<double>(report.non_outlier_count);
  if (report.outlier_count > 0)
    report.detection_rate =
        static_cast<double>(detected) / static_cast<double>(report.outlier_count);
  return report;
}

Replicated replicate(const std::vector<std::optional<double>>& values) {
  Replicated out;
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++out.count;
  }
  if (out.count == 0) return out;
  const double mean = sum / static_cast<double>(out.count);
  out.mean = mean;
  if (out.count >= 2) {
    double ss = 0.0;
    for (const auto& v : values)
      if (v) ss += (*v - mean) * (*v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(out.count));
    out.se = sd / std::sqrt(static_cast<double>(out.count));
  }
  return out;
}

std::string metric_to_string(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

std::vector<SweepCell> gamma_sweep(
    const std::function<MetricsReport(double, const std::string&)>& fit_and_eval,
    const std::vector<double>& gammas, const std::vector<std::string>& methods) {
  if (!std::is_sorted(gammas.begin(), gammas.end()))
    throw InputError("gamma_sweep: gammas must be sorted ascending");
  std::vector<SweepCell> cells;
  for (double gamma : gammas) {
    for (const std::string& method : methods) {
      auto emit = [&](const std::string& metric, std::optional<double> value,
                      const std::string& error) {
        SweepCell c;
        c.gamma = gamma;
        c.method = method;
        c.metric = metric;
        c.value = value;
        c.error = error;
        cells.push_back(std::move(c));
      };
      try {
        const MetricsReport rep = fit_and_eval(gamma, method);
        emit("cardinality", rep.cardinality, "");
        emit("conditional_cardinality", rep.conditional_cardinality, "");
        emit("detection_rate", rep.detection_rate, "");
      } catch (const std::exception& e) {
        emit("cardinality", std::nullopt, e.what());
        emit("conditional_cardinality", std::nullopt, e.what());
        emit("detection_rate", std::nullopt, e.what());
      }
    }
  }
  return cells;
}

std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "gamma,method,metric,value,se\n";
  char buf[32];
  for (const SweepCell& c : cells) {
    std::snprintf(buf, sizeof buf, "%.10g", c.gamma);
    out << buf << "," << c.method << "," << c.metric << "," << metric_to_string(c.value) << ","
        << metric_to_string(c.se) << "\n";
  }
  return out.str();
}

}  // namespace gps
