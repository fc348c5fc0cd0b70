#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gps/conformal.hpp"
#include "gps/datagen.hpp"
#include "gps/metrics.hpp"
#include "gps/types.hpp"

namespace {

using namespace gps;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

// ---------------------------------------------------------------------------
// configuration

std::vector<double> log_grid(double lo_exp, double hi_exp, double step) {
  std::vector<double> out;
  for (double e = lo_exp; e <= hi_exp + 1e-12; e += step) out.push_back(std::pow(10.0, e));
  return out;
}

struct RunConfig {
  std::string method = "gps";
  double gamma = 0.05;
  double c = 1.0;
  double c1 = 1.0;
  double c2 = 0.1;
  double sigma = 0.0;  // <= 0 selects the median pairwise-distance heuristic
  long m_max = 500;
  double split_ratio = 0.5;
  std::uint64_t seed = 1;
  int jobs = 1;
  int replications = 20;
  std::vector<double> c_grid = log_grid(-2.0, 2.0, 0.5);
  std::vector<double> c1_grid = {1.0, 2.0, 3.0};
  std::vector<double> c2_grid = log_grid(-1.0, 1.0, 0.25);
  std::vector<double> sigma_percentiles = {25.0, 37.5, 50.0, 62.5, 75.0};
  std::vector<double> gamma_grid = {0.01, 0.02, 0.05, 0.1};
};

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::vector<double> parse_array(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value '" + tok + "' for config key " + key);
    }
  }
  if (out.empty()) throw ConfigError("empty array for config key " + key);
  return out;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto as_double = [&] {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value '" + value + "' for config key " + key);
    }
  };
  if (key == "method") cfg.method = value;
  else if (key == "gamma") cfg.gamma = as_double();
  else if (key == "c") cfg.c = as_double();
  else if (key == "c1") cfg.c1 = as_double();
  else if (key == "c2") cfg.c2 = as_double();
  else if (key == "sigma") cfg.sigma = as_double();
  else if (key == "m_max") cfg.m_max = static_cast<long>(as_double());
  else if (key == "split_ratio") cfg.split_ratio = as_double();
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_double());
  else if (key == "jobs") cfg.jobs = static_cast<int>(as_double());
  else if (key == "replications") cfg.replications = static_cast<int>(as_double());
  else if (key == "c_grid") cfg.c_grid = parse_array(value, key);
  else if (key == "c1_grid") cfg.c1_grid = parse_array(value, key);
  else if (key == "c2_grid") cfg.c2_grid = parse_array(value, key);
  else if (key == "sigma_percentiles") cfg.sigma_percentiles = parse_array(value, key);
  else if (key == "gamma_grid") cfg.gamma_grid = parse_array(value, key);
  else throw ConfigError("unknown config key '" + key + "'");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void print_config(const RunConfig& cfg, std::ostream& os) {
  os << "method = " << cfg.method << "\n"
     << "gamma = " << cfg.gamma << "\n"
     << "c = " << cfg.c << "\n"
     << "c1 = " << cfg.c1 << "\n"
     << "c2 = " << cfg.c2 << "\n"
     << "sigma = " << cfg.sigma << "\n"
     << "m_max = " << cfg.m_max << "\n"
     << "split_ratio = " << cfg.split_ratio << "\n"
     << "seed = " << cfg.seed << "\n"
     << "jobs = " << cfg.jobs << "\n"
     << "replications = " << cfg.replications << "\n"
     << "c_grid = " << join(cfg.c_grid) << "\n"
     << "c1_grid = " << join(cfg.c1_grid) << "\n"
     << "c2_grid = " << join(cfg.c2_grid) << "\n"
     << "sigma_percentiles = " << join(cfg.sigma_percentiles) << "\n"
     << "gamma_grid = " << join(cfg.gamma_grid) << "\n";
}

void validate_common(const RunConfig& cfg) {
  if (cfg.gamma <= 0.0 || cfg.gamma >= 1.0)
    throw ConfigError("gamma must lie in (0, 1)");
  if (cfg.method != "gps" && cfg.method != "gpskfs" && cfg.method != "ocsvm")
    throw ConfigError("unknown method '" + cfg.method + "'");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (cfg.split_ratio <= 0.0 || cfg.split_ratio >= 1.0)
    throw ConfigError("split_ratio must lie in (0, 1)");
}

// Environment override for the base seed, applied after config and flags.
void apply_env_seed(RunConfig& cfg) {
  if (const char* env = std::getenv("GPS_SEED")) {
    try {
      cfg.seed = static_cast<std::uint64_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw ConfigError("GPS_SEED is not a valid integer");
    }
  }
}

FitConfig to_fit_config(const RunConfig& cfg) {
  FitConfig fit;
  fit.gamma = cfg.gamma;
  fit.c_bound = cfg.c;
  fit.c1 = cfg.c1;
  fit.c2 = cfg.c2;
  fit.sigma = cfg.sigma;
  fit.m_max = cfg.m_max;
  fit.split_ratio = cfg.split_ratio;
  fit.seed = cfg.seed;
  fit.jobs = cfg.jobs;
  return fit;
}

// ---------------------------------------------------------------------------
// atomic file output

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

template <typename Fn>
void atomic_file(const std::string& path, Fn&& writer) {
  const std::string tmp = path + ".tmp";
  writer(tmp);
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// shared pipeline helpers

LabeledSet load_labeled(const std::string& path) { return load_csv(path); }

Matrix pool_from(const std::optional<LabeledSet>& test, Eigen::Index dim) {
  if (test) return test->features;
  return Matrix(0, dim);
}

std::vector<EvalRecord> evaluate_rows(const SetValuedModel& model, const LabeledSet& truth,
                                      const std::vector<Eigen::Index>& skip_rows) {
  std::vector<char> skip(static_cast<std::size_t>(truth.size()), 0);
  for (Eigen::Index r : skip_rows) skip[static_cast<std::size_t>(r)] = 1;
  std::vector<EvalRecord> records;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (skip[static_cast<std::size_t>(i)]) continue;
    EvalRecord rec;
    rec.true_label = truth.labels[static_cast<std::size_t>(i)];
    rec.predicted_set = model.predict_set(truth.features.row(i));
    records.push_back(std::move(rec));
  }
  return records;
}

std::string metrics_csv(const MetricsReport& report, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "metric,value\n";
  for (std::size_t k = 0; k < report.coverage.size(); ++k)
    os << "coverage_" << names[k] << "," << metric_to_string(report.coverage[k]) << "\n";
  os << "cardinality," << metric_to_string(report.cardinality) << "\n";
  os << "conditional_cardinality," << metric_to_string(report.conditional_cardinality) << "\n";
  os << "detection_rate," << metric_to_string(report.detection_rate) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_simulate(int example, long n_per_class, long n_outlier, std::uint64_t seed,
                 const std::string& out_dir) {
  SimSpec spec;
  spec.example = example == 1 ? SimExample::ex1 : SimExample::ex2;
  spec.n_per_class = n_per_class;
  spec.n_outlier = n_outlier;
  spec.seed = seed;
  const SimulatedData data = generate(spec);
  std::filesystem::create_directories(out_dir);
  atomic_file((std::filesystem::path(out_dir) / "train.csv").string(),
              [&](const std::string& tmp) { save_csv(tmp, data.train); });
  atomic_file((std::filesystem::path(out_dir) / "test.csv").string(),
              [&](const std::string& tmp) { save_csv(tmp, data.test); });
  std::cout << "wrote " << out_dir << "/train.csv (" << data.train.size() << " rows) and "
            << out_dir << "/test.csv (" << data.test.size() << " rows)\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& train_path, const std::string& test_path,
              const std::string& out_model) {
  const LabeledSet train = load_labeled(train_path);
  std::optional<LabeledSet> test;
  if (!test_path.empty()) test = load_labeled(test_path);
  if (cfg.method != "ocsvm" && !test)
    throw ConfigError("method " + cfg.method + " requires --test (unlabeled test pool)");
  const FitResult fit =
      fit_conformal(train, pool_from(test, train.dim()), method_from_name(cfg.method),
                    to_fit_config(cfg));
  atomic_file(out_model, [&](const std::string& tmp) { save_model(tmp, fit.model); });
  std::cout << "wrote model " << out_model << " (" << fit.model.num_classes() << " classes)\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
  const SetValuedModel model = load_model(model_path);
  const LabeledSet data = load_labeled(data_path);
  std::ostringstream os;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const std::vector<int> set = model.predict_set(data.features.row(i));
    for (std::size_t j = 0; j < set.size(); ++j) {
      if (j) os << ",";
      os << model.class_names[static_cast<std::size_t>(set[j])];
    }
    os << "\n";
  }
  atomic_write(out_path, os.str());
  std::cout << "wrote predictions for " << data.size() << " rows to " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& predictions_path, const std::string& data_path,
                 const std::string& out_path) {
  const LabeledSet truth = load_labeled(data_path);
  std::ifstream in(predictions_path);
  if (!in) throw ParseError("cannot open " + predictions_path);
  std::map<std::string, int> name_to_id;
  for (std::size_t k = 0; k < truth.label_names.size(); ++k)
    name_to_id[truth.label_names[k]] = static_cast<int>(k);

  std::vector<EvalRecord> records;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno > truth.size())
      throw ParseError("more prediction rows than data rows", lineno);
    EvalRecord rec;
    rec.true_label = truth.labels[static_cast<std::size_t>(lineno - 1)];
    if (!line.empty()) {
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        const auto it = name_to_id.find(tok);
        if (it == name_to_id.end())
          throw ParseError("predicted label '" + tok + "' not present in " + data_path, lineno);
        rec.predicted_set.push_back(it->second);
      }
    }
    records.push_back(std::move(rec));
  }
  if (lineno != truth.size())
    throw ParseError("prediction rows (" + std::to_string(lineno) + ") do not match data rows (" +
                     std::to_string(truth.size()) + ")");
  const MetricsReport report = compute_metrics(records, truth.num_classes());
  const std::string csv = metrics_csv(report, truth.label_names);
  if (out_path.empty())
    std::cout << csv;
  else
    atomic_write(out_path, csv);
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& train_path, const std::string& test_path,
              const std::vector<std::string>& methods, const std::string& out_path) {
  const LabeledSet train = load_labeled(train_path);
  const LabeledSet test = load_labeled(test_path);

  // One fit per (method, replication) at the base gamma; the gamma grid is
  // walked by threshold recalibration so prediction sets stay nested.
  struct Fitted {
    SetValuedModel model;
    std::vector<std::vector<double>> calib_scores;
    std::vector<Eigen::Index> test_subset;
  };

  const std::vector<double>& gammas = cfg.gamma_grid;
  const std::vector<std::string> metric_names{"coverage", "cardinality", "detection_rate"};
  std::map<std::pair<std::string, std::size_t>, std::array<std::vector<std::optional<double>>, 3>>
      values;
  std::map<std::pair<std::string, std::size_t>, std::string> errors;

  for (int r = 0; r < cfg.replications; ++r) {
    RunConfig rep_cfg = cfg;
    rep_cfg.seed = cfg.seed + static_cast<std::uint64_t>(r);
    std::map<std::string, Fitted> cache;
    for (const std::string& method : methods) {
      try {
        RunConfig mc = rep_cfg;
        mc.method = method;
        mc.gamma = gammas.front();
        const FitResult fit = fit_conformal(train, test.features, method_from_name(method),
                                            to_fit_config(mc));
        const SplitPlan plan = make_split_plan(train, mc.split_ratio, mc.seed);
        Fitted f{fit.model, calibration_scores(fit.model, train, plan), fit.test_subset};
        for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
          SetValuedModel model = f.model;
          recalibrate(model, f.calib_scores, gammas[gi]);
          const MetricsReport rep =
              compute_metrics(evaluate_rows(model, test, f.test_subset), train.num_classes());
          const Replicated cov = replicate(rep.coverage);
          auto& slot = values[{method, gi}];
          slot[0].push_back(cov.mean);
          slot[1].push_back(rep.cardinality);
          slot[2].push_back(rep.detection_rate);
        }
      } catch (const std::exception& e) {
        for (std::size_t gi = 0; gi < gammas.size(); ++gi)
          errors[{method, gi}] = e.what();
      }
    }
  }

  std::vector<SweepCell> cells;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    for (const std::string& method : methods) {
      const auto err_it = errors.find({method, gi});
      for (std::size_t mi = 0; mi < metric_names.size(); ++mi) {
        SweepCell cell;
        cell.gamma = gammas[gi];
        cell.method = method;
        cell.metric = metric_names[mi];
        if (err_it != errors.end()) {
          cell.error = err_it->second;
        } else {
          const Replicated rep = replicate(values[{method, gi}][mi]);
          cell.value = rep.mean;
          cell.se = rep.se;
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  const std::string csv = sweep_to_csv(cells);
  if (out_path.empty())
    std::cout << csv;
  else
    atomic_write(out_path, csv);
  return 0;
}

int cmd_tune(const RunConfig& cfg, const std::string& train_path, const std::string& test_path,
             const std::string& out_model) {
  const LabeledSet train = load_labeled(train_path);
  std::optional<LabeledSet> test;
  if (!test_path.empty()) test = load_labeled(test_path);
  if (cfg.method != "ocsvm" && !test)
    throw ConfigError("method " + cfg.method + " requires --test (unlabeled test pool)");
  const Matrix pool = pool_from(test, train.dim());

  const std::vector<double> sigmas =
      bandwidth_candidates(train.features, WeightVector::ones(train.dim()),
                           cfg.sigma_percentiles);

  // Candidate order encodes the tie-break: later candidates win only with a
  // strictly smaller calibration cardinality. Larger regularization (C2 for
  // GPSKFS, C for GPS) is preferred, then the smaller sigma index.
  struct Candidate {
    double c = 0.0, c1 = 0.0, c2 = 0.0, sigma = 0.0;
  };
  std::vector<Candidate> candidates;
  if (cfg.method == "gps") {
    std::vector<double> cs = cfg.c_grid;
    std::sort(cs.begin(), cs.end(), std::greater<>());
    for (double c : cs)
      for (double s : sigmas) candidates.push_back({c, cfg.c1, cfg.c2, s});
  } else if (cfg.method == "gpskfs") {
    std::vector<double> c2s = cfg.c2_grid;
    std::sort(c2s.begin(), c2s.end(), std::greater<>());
    for (double c2 : c2s)
      for (double c1 : cfg.c1_grid)
        for (double s : sigmas) candidates.push_back({cfg.c, c1, c2, s});
  } else {
    for (double s : sigmas) candidates.push_back({cfg.c, cfg.c1, cfg.c2, s});
  }
  if (candidates.empty()) throw ConfigError("empty tuning grid");

  const SplitPlan plan = make_split_plan(train, cfg.split_ratio, cfg.seed);
  double best_card = std::numeric_limits<double>::infinity();
  std::optional<Candidate> best;
  std::optional<FitResult> best_fit;
  for (const Candidate& cand : candidates) {
    RunConfig rc = cfg;
    rc.c = cand.c;
    rc.c1 = cand.c1;
    rc.c2 = cand.c2;
    rc.sigma = cand.sigma;
    FitResult fit;
    try {
      fit = fit_conformal(train, pool, method_from_name(cfg.method), to_fit_config(rc));
    } catch (const std::exception&) {
      continue;  // infeasible cell; the remaining grid still competes
    }
    double total = 0.0;
    long count = 0;
    for (std::size_t k = 0; k < plan.calib_idx.size(); ++k) {
      for (Eigen::Index row : plan.calib_idx[k]) {
        total += static_cast<double>(fit.model.predict_set(train.features.row(row)).size());
        ++count;
      }
    }
    const double card = total / static_cast<double>(std::max<long>(count, 1));
    if (card < best_card - 1e-12) {
      best_card = card;
      best = cand;
      best_fit = std::move(fit);
    }
  }
  if (!best) throw TrainingError("every tuning candidate failed to train");

  atomic_file(out_model, [&](const std::string& tmp) { save_model(tmp, best_fit->model); });
  std::cout << "selected"
            << " c = " << best->c << " c1 = " << best->c1 << " c2 = " << best->c2
            << " sigma = " << best->sigma << "\n"
            << "calibration cardinality = " << best_card << "\n"
            << "wrote model " << out_model << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"set-valued multicategory classification with anomaly detection"};
  app.require_subcommand(0, 1);

  RunConfig cfg;
  std::string config_path;
  bool show_config = false;
  app.add_option("--config", config_path, "flat key = value configuration file")
      ->each([&](const std::string& path) { load_config_file(cfg, path); });
  app.add_flag("--print-config", show_config, "print the effective configuration and exit");

  // shared tuning knobs (override the config file)
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--method", cfg.method, "gps | gpskfs | ocsvm");
    sub->add_option("--gamma", cfg.gamma, "target per-class non-coverage in (0,1)");
    sub->add_option("--c", cfg.c, "GPS regularization C");
    sub->add_option("--c1", cfg.c1, "GPSKFS loss weight C1");
    sub->add_option("--c2", cfg.c2, "GPSKFS l1 weight C2");
    sub->add_option("--sigma", cfg.sigma, "kernel bandwidth (<= 0: median heuristic)");
    sub->add_option("--m-max", cfg.m_max, "cap on the shared unlabeled test subset");
    sub->add_option("--split-ratio", cfg.split_ratio, "train share of the conformal split");
    sub->add_option("--seed", cfg.seed, "base RNG seed");
    sub->add_option("--jobs", cfg.jobs, "parallel per-class training jobs");
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic train/test pair");
  int example = 1;
  long n_per_class = 500, n_outlier = 200;
  std::string out_dir = ".";
  sim->add_option("--example", example, "1 or 2")->check(CLI::IsMember({1, 2}));
  sim->add_option("--n-per-class", n_per_class, "points per class");
  sim->add_option("--n-outlier", n_outlier, "outlier points in the test set");
  sim->add_option("--seed", cfg.seed, "RNG seed");
  sim->add_option("--out", out_dir, "output directory");

  // train
  auto* train = app.add_subcommand("train", "fit a set-valued model");
  std::string train_path, test_path, model_path = "model.txt";
  add_common(train);
  train->add_option("--train", train_path, "labeled training CSV")->required();
  train->add_option("--test", test_path, "unlabeled test-pool CSV");
  train->add_option("--out-model", model_path, "output model file");

  // predict
  auto* predict = app.add_subcommand("predict", "emit prediction sets for a data file");
  std::string pred_out = "predictions.csv";
  predict->add_option("--model", model_path, "model file")->required();
  predict->add_option("--data", test_path, "feature CSV to score")->required();
  predict->add_option("--out", pred_out, "predictions output path");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "join predictions with truth labels");
  std::string eval_pred, eval_out;
  evaluate->add_option("--predictions", eval_pred, "predictions file")->required();
  evaluate->add_option("--data", test_path, "labeled truth CSV")->required();
  evaluate->add_option("--out", eval_out, "metrics CSV (stdout when omitted)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "scree table over the gamma grid");
  std::vector<std::string> sweep_methods{"gps", "gpskfs", "ocsvm"};
  std::string sweep_out;
  add_common(sweep);
  sweep->add_option("--train", train_path, "labeled training CSV")->required();
  sweep->add_option("--test", test_path, "labeled test CSV")->required();
  sweep->add_option("--methods", sweep_methods, "methods to sweep");
  sweep->add_option("--replications", cfg.replications, "replication count");
  sweep->add_option("--out", sweep_out, "output table path (stdout when omitted)");

  // tune
  auto* tune = app.add_subcommand("tune", "grid-search hyperparameters");
  add_common(tune);
  tune->add_option("--train", train_path, "labeled training CSV")->required();
  tune->add_option("--test", test_path, "unlabeled test-pool CSV");
  tune->add_option("--out-model", model_path, "output model file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  } catch (const gps::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    apply_env_seed(cfg);
    if (show_config) {
      print_config(cfg, std::cout);
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << "error: a subcommand is required (see --help)\n";
      return kExitUsage;
    }
    validate_common(cfg);
    if (sim->parsed()) return cmd_simulate(example, n_per_class, n_outlier, cfg.seed, out_dir);
    if (train->parsed()) return cmd_train(cfg, train_path, test_path, model_path);
    if (predict->parsed()) return cmd_predict(model_path, test_path, pred_out);
    if (evaluate->parsed()) return cmd_evaluate(eval_pred, test_path, eval_out);
    if (sweep->parsed()) return cmd_sweep(cfg, train_path, test_path, sweep_methods, sweep_out);
    if (tune->parsed()) return cmd_tune(cfg, train_path, test_path, model_path);
    return kExitUsage;
  } catch (const gps::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gps::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const gps::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const gps::TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
