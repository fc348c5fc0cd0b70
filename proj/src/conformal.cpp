#include "gps/conformal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "gps/ocsvm.hpp"

namespace gps {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string method_name(Method m) {
  switch (m) {
    case Method::gps: return "gps";
    case Method::gpskfs: return "gpskfs";
    case Method::ocsvm: return "ocsvm";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "gps") return Method::gps;
  if (name == "gpskfs") return Method::gpskfs;
  if (name == "ocsvm") return Method::ocsvm;
  throw ConfigError("unknown method '" + name + "'");
}

SplitPlan make_split_plan(const LabeledSet& data, double train_ratio, std::uint64_t seed) {
  const int k = data.num_classes();
  SplitPlan plan;
  plan.seed = seed;
  plan.train_idx.resize(static_cast<std::size_t>(k));
  plan.calib_idx.resize(static_cast<std::size_t>(k));
  std::mt19937_64 rng(seed);
  for (int cls = 0; cls < k; ++cls) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < data.size(); ++i)
      if (data.labels[static_cast<std::size_t>(i)] == cls) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::round(train_ratio * static_cast<double>(idx.size())));
    auto& tr = plan.train_idx[static_cast<std::size_t>(cls)];
    auto& ca = plan.calib_idx[static_cast<std::size_t>(cls)];
    tr.assign(idx.begin(), idx.begin() + static_cast<long>(n_train));
    ca.assign(idx.begin() + static_cast<long>(n_train), idx.end());
    std::sort(tr.begin(), tr.end());
    std::sort(ca.begin(), ca.end());
  }
  return plan;
}

double calibrate_threshold(std::vector<double> scores, double gamma) {
  if (scores.empty()) throw InputError("calibrate_threshold: empty score set");
  const auto n = static_cast<double>(scores.size());
  const long k_star = static_cast<long>(std::floor(gamma * (n + 1.0)));
  if (k_star < 1) return kNegInf;
  std::sort(scores.begin(), scores.end());
  return scores[static_cast<std::size_t>(k_star - 1)];
}

std::vector<int> SetValuedModel::predict_set(const Vector& x) const {
  std::vector<int> out;
  for (int k = 0; k < num_classes(); ++k) {
    if (decisions[static_cast<std::size_t>(k)].score(x) >= taus[static_cast<std::size_t>(k)])
      out.push_back(k);
  }
  return out;
}

namespace {

Matrix gather_rows(const Matrix& src, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(idx[i]);
  return out;
}

double pick_sigma(const Matrix& train_features, const FitConfig& config) {
  if (config.sigma > 0.0) return config.sigma;
  // median pairwise distance over a deterministic stride sample
  const Eigen::Index cap = 500;
  Matrix sample = train_features;
  if (train_features.rows() > cap) {
    const Eigen::Index stride = (train_features.rows() + cap - 1) / cap;
    Eigen::Index count = (train_features.rows() + stride - 1) / stride;
    sample.resize(count, train_features.cols());
    for (Eigen::Index i = 0, r = 0; i < train_features.rows(); i += stride)
      sample.row(r++) = train_features.row(i);
  }
  return bandwidth_candidates(sample, WeightVector::ones(train_features.cols()), {50.0})[0];
}

}  // namespace

FitResult fit_conformal(const LabeledSet& train_data, const Matrix& test_pool, Method method,
                        const FitConfig& config) {
  const int k = train_data.num_classes();
  if (k < 1) throw ConfigError("fit_conformal: no classes in the training data");
  if (!(config.gamma > 0.0 && config.gamma < 1.0))
    throw ConfigError("fit_conformal: gamma must lie in (0,1)");
  for (int cls = 0; cls < k; ++cls) {
    long count = 0;
    for (int l : train_data.labels)
      if (l == cls) ++count;
    if (count < 4)
      throw ConfigError("fit_conformal: class " +
                        train_data.label_names[static_cast<std::size_t>(cls)] +
                        " has fewer than 4 points");
  }
  for (int l : train_data.labels)
    if (l == kOutlierLabel)
      throw ConfigError("fit_conformal: training data must not contain outlier rows");
  if (method != Method::ocsvm && test_pool.rows() < 4)
    throw ConfigError("fit_conformal: this method requires an unlabeled test pool");

  const SplitPlan plan = make_split_plan(train_data, config.split_ratio, config.seed);

  // shared test subset across all per-class trainings
  std::vector<Eigen::Index> subset;
  if (method != Method::ocsvm) {
    std::vector<Eigen::Index> pool_idx(static_cast<std::size_t>(test_pool.rows()));
    for (Eigen::Index i = 0; i < test_pool.rows(); ++i) pool_idx[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::shuffle(pool_idx.begin(), pool_idx.end(), rng);
    const auto m = static_cast<std::size_t>(
        std::min<long>(config.m_max, static_cast<long>(test_pool.rows()) / 2));
    subset.assign(pool_idx.begin(), pool_idx.begin() + static_cast<long>(std::max<std::size_t>(m, 2)));
    std::sort(subset.begin(), subset.end());
  }
  const Matrix test_subset_rows = gather_rows(test_pool, subset);

  SetValuedModel model;
  model.method = method_name(method);
  model.gamma = config.gamma;
  model.class_names = train_data.label_names;
  model.decisions.resize(static_cast<std::size_t>(k));
  model.taus.assign(static_cast<std::size_t>(k), 0.0);

  std::vector<std::string> failures(static_cast<std::size_t>(k));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int cls = next.fetch_add(1);
      if (cls >= k) return;
      try {
        const Matrix class_train =
            gather_rows(train_data.features, plan.train_idx[static_cast<std::size_t>(cls)]);
        // class-specific automatic bandwidth: each model's geometry follows
        // its own class sample
        const KernelSpec kernel = config.family == KernelFamily::gaussian
                                      ? KernelSpec::gaussian(pick_sigma(class_train, config))
                                      : KernelSpec::linear();
        DecisionFunction f;
        if (method == Method::ocsvm) {
          OcsvmConfig oc;
          oc.nu = config.gamma;  // class-specific counterpart of nu
          oc.kernel = kernel;
          f = train_ocsvm(class_train, oc);
        } else {
          ClassTrainingInput input;
          input.train_pts = class_train;
          input.test_pts = test_subset_rows;
          input.gamma = config.gamma;
          input.c_bound = config.c_bound;
          input.kernel = kernel;
          input.d = WeightVector::ones(class_train.cols());
          input.gamma_adjust = config.gamma_adjust;
          if (method == Method::gps) {
            f = train_gps(input);
          } else {
            GpskfsResult res = train_gpskfs(input, config.c1, config.c2, config.kfs_options);
            // the learned weights change the distance geometry; re-estimate
            // the bandwidth under them and continue training from the result
            for (int refit = 0; refit < config.sigma_refits && config.sigma <= 0.0; ++refit) {
              double new_sigma = 0.0;
              try {
                new_sigma = bandwidth_candidates(class_train, res.decision.d,
                                                 {config.sigma_refit_percentile})[0];
              } catch (const InputError&) {
                break;
              }
              if (!(new_sigma > 0.0) ||
                  std::abs(new_sigma - input.kernel.sigma) <= 0.05 * input.kernel.sigma)
                break;
              input.kernel = KernelSpec::gaussian(new_sigma);
              input.d = res.decision.d;
              res = train_gpskfs(input, config.c1, config.c2, config.kfs_options);
            }
            f = res.decision;
          }
        }
        const Matrix calib =
            gather_rows(train_data.features, plan.calib_idx[static_cast<std::size_t>(cls)]);
        const Vector scores = f.score_rows(calib);
        model.taus[static_cast<std::size_t>(cls)] = calibrate_threshold(
            std::vector<double>(scores.data(), scores.data() + scores.size()), config.gamma);
        model.decisions[static_cast<std::size_t>(cls)] = std::move(f);
      } catch (const std::exception& e) {
        failures[static_cast<std::size_t>(cls)] = e.what();
      }
    }
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(jobs, k); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::string message;
  for (int cls = 0; cls < k; ++cls)
    if (!failures[static_cast<std::size_t>(cls)].empty())
      message += "class " + train_data.label_names[static_cast<std::size_t>(cls)] + ": " +
                 failures[static_cast<std::size_t>(cls)] + "; ";
  if (!message.empty()) throw TrainingError("fit_conformal failed: " + message);

  return {std::move(model), std::move(subset)};
}

std::vector<std::vector<double>> calibration_scores(const SetValuedModel& model,
                                                    const LabeledSet& train_data,
                                                    const SplitPlan& plan) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(model.num_classes()));
  for (int cls = 0; cls < model.num_classes(); ++cls) {
    const Matrix calib =
        gather_rows(train_data.features, plan.calib_idx[static_cast<std::size_t>(cls)]);
    const Vector scores = model.decisions[static_cast<std::size_t>(cls)].score_rows(calib);
    out[static_cast<std::size_t>(cls)].assign(scores.data(), scores.data() + scores.size());
  }
  return out;
}

void recalibrate(SetValuedModel& model, const std::vector<std::vector<double>>& calib_scores,
                 double gamma) {
  if (static_cast<int>(calib_scores.size()) != model.num_classes())
    throw InputError("recalibrate: one score vector per class expected");
  for (int cls = 0; cls < model.num_classes(); ++cls)
    model.taus[static_cast<std::size_t>(cls)] =
        calibrate_threshold(calib_scores[static_cast<std::size_t>(cls)], gamma);
  model.gamma = gamma;
}

namespace {

void write_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void save_model(const std::string& path, const SetValuedModel& model) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "gpsmodel v1\n";
  out << "method " << model.method << "\n";
  out << "gamma ";
  write_double(out, model.gamma);
  out << "\nclasses " << model.num_classes() << "\n";
  for (int cls = 0; cls < model.num_classes(); ++cls) {
    const DecisionFunction& f = model.decisions[static_cast<std::size_t>(cls)];
    out << "class " << model.class_names[static_cast<std::size_t>(cls)] << "\n";
    out << "kernel "
        << (f.kernel.family == KernelFamily::gaussian ? "gaussian " : "linear ");
    write_double(out, f.kernel.sigma);
    out << "\ndim " << f.supports.cols() << "\nd";
    for (Eigen::Index t = 0; t < f.d.size(); ++t) {
      out << " ";
      write_double(out, f.d.d[t]);
    }
    out << "\nrho ";
    write_double(out, f.rho);
    out << "\ntau ";
    write_double(out, model.taus[static_cast<std::size_t>(cls)]);
    out << "\nsupports " << f.supports.rows() << "\n";
    for (Eigen::Index i = 0; i < f.supports.rows(); ++i) {
      write_double(out, f.coefficients[i]);
      for (Eigen::Index t = 0; t < f.supports.cols(); ++t) {
        out << " ";
        write_double(out, f.supports(i, t));
      }
      out << "\n";
    }
  }
  out << "end\n";
  if (!out) throw ConfigError("write failed for " + path);
}

SetValuedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string tag, version;
  in >> tag >> version;
  if (tag != "gpsmodel" || version != "v1") throw ParseError(path + ": not a gpsmodel v1 file", 1);
  SetValuedModel model;
  std::string key;
  int classes = 0;
  in >> key >> model.method;
  if (key != "method") throw ParseError(path + ": expected 'method'");
  in >> key >> model.gamma;
  if (key != "gamma") throw ParseError(path + ": expected 'gamma'");
  in >> key >> classes;
  if (key != "classes" || classes < 1) throw ParseError(path + ": bad class count");

  for (int cls = 0; cls < classes; ++cls) {
    std::string name, family;
    in >> key >> name;
    if (key != "class") throw ParseError(path + ": expected 'class'");
    model.class_names.push_back(name);
    DecisionFunction f;
    double sigma = 0.0;
    in >> key >> family >> sigma;
    if (key != "kernel") throw ParseError(path + ": expected 'kernel'");
    f.kernel = family == "gaussian" ? KernelSpec::gaussian(sigma) : KernelSpec::linear();
    Eigen::Index dim = 0;
    in >> key >> dim;
    if (key != "dim" || dim < 1) throw ParseError(path + ": bad dimension");
    in >> key;
    if (key != "d") throw ParseError(path + ": expected 'd'");
    f.d.d.resize(dim);
    for (Eigen::Index t = 0; t < dim; ++t) in >> f.d.d[t];
    in >> key >> f.rho;
    if (key != "rho") throw ParseError(path + ": expected 'rho'");
    // tau may be the -inf sentinel, which istream double parsing rejects
    std::string tau_token;
    in >> key >> tau_token;
    if (key != "tau") throw ParseError(path + ": expected 'tau'");
    double tau = 0.0;
    try {
      tau = std::stod(tau_token);
    } catch (const std::exception&) {
      throw ParseError(path + ": bad tau value '" + tau_token + "'");
    }
    Eigen::Index n_sup = 0;
    in >> key >> n_sup;
    if (key != "supports" || n_sup < 0) throw ParseError(path + ": bad support count");
    f.supports.resize(n_sup, dim);
    f.coefficients.resize(n_sup);
    for (Eigen::Index i = 0; i < n_sup; ++i) {
      in >> f.coefficients[i];
      for (Eigen::Index t = 0; t < dim; ++t) in >> f.supports(i, t);
    }
    if (!in) throw ParseError(path + ": truncated class block");
    model.taus.push_back(tau);
    model.decisions.push_back(std::move(f));
  }
  in >> key;
  if (key != "end") throw ParseError(path + ": missing end marker");
  return model;
}

}  // namespace gps
