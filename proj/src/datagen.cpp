#include "gps/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace gps {

Matrix LabeledSet::rows_with_label(int label) const {
  Eigen::Index count = 0;
  for (int l : labels)
    if (l == label) ++count;
  Matrix out(count, features.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    if (labels[static_cast<std::size_t>(i)] == label) out.row(r++) = features.row(i);
  return out;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Outlier mixture rectangles for Example 1: size 2 (radial) x 4
// (tangential), centered at radius 10 on the four axes. Far enough from
// any class mean (radius <= 6) that the outlier mass stays outside
// typical class ellipses.
struct Rect {
  double x_lo, x_hi, y_lo, y_hi;
};
constexpr std::array<Rect, 4> kEx1Rects{{
    {9.0, 11.0, -2.0, 2.0},
    {-11.0, -9.0, -2.0, 2.0},
    {-2.0, 2.0, 9.0, 11.0},
    {-2.0, 2.0, -11.0, -9.0},
}};

Vector ex1_outlier_signal(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  const Rect& r = kEx1Rects[static_cast<std::size_t>(pick(rng))];
  std::uniform_real_distribution<double> ux(r.x_lo, r.x_hi);
  std::uniform_real_distribution<double> uy(r.y_lo, r.y_hi);
  Vector v(2);
  v << ux(rng), uy(rng);
  return v;
}

void append_noise(Matrix& rows, Eigen::Index signal_dim, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sd);
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index t = signal_dim; t < rows.cols(); ++t) rows(i, t) = noise(rng);
}

std::vector<std::string> class_names(int k) {
  std::vector<std::string> names;
  for (int i = 1; i <= k; ++i) names.push_back(std::to_string(i));
  return names;
}

}  // namespace

std::pair<Example1Params, SimulatedData> generate_example1(const SimSpec& spec) {
  if (spec.n_per_class < 1 || spec.n_outlier < 1)
    throw InputError("simulation counts must be at least 1");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Example1Params params;
  for (int k = 0; k < 4; ++k) {
    const double r = 6.0 * u01(rng);
    const double theta = kTwoPi * u01(rng);
    params.mu[static_cast<std::size_t>(k)] = Vector(2);
    params.mu[static_cast<std::size_t>(k)] << r * std::cos(theta), r * std::sin(theta);
    const double sigma = 0.8 + 0.4 * u01(rng);
    Matrix sq = Matrix::Zero(2, 2);
    sq(0, 0) = sq(1, 1) = sigma;
    const double eps = -0.5 + u01(rng);
    sq.array() += eps;
    params.sqrt_sigma[static_cast<std::size_t>(k)] = sq;
  }

  const Eigen::Index p = 10;
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  auto draw_class = [&](int k, Eigen::Index n) {
    Matrix rows(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector z(2);
      z << stdnorm(rng), stdnorm(rng);
      rows.row(i).head(2) =
          (params.mu[static_cast<std::size_t>(k)] + params.sqrt_sigma[static_cast<std::size_t>(k)] * z)
              .transpose();
    }
    append_noise(rows, 2, 0.1, rng);
    return rows;
  };

  SimulatedData data;
  const Eigen::Index n = spec.n_per_class;
  data.train.features.resize(4 * n, p);
  data.train.provenance = "train";
  data.train.label_names = class_names(4);
  data.test.features.resize(4 * n + spec.n_outlier, p);
  data.test.provenance = "test";
  data.test.label_names = class_names(4);
  for (int k = 0; k < 4; ++k) {
    data.train.features.middleRows(k * n, n) = draw_class(k, n);
    for (Eigen::Index i = 0; i < n; ++i) data.train.labels.push_back(k);
  }
  for (int k = 0; k < 4; ++k) {
    data.test.features.middleRows(k * n, n) = draw_class(k, n);
    for (Eigen::Index i = 0; i < n; ++i) data.test.labels.push_back(k);
  }
  Matrix outliers(spec.n_outlier, p);
  for (Eigen::Index i = 0; i < spec.n_outlier; ++i)
    outliers.row(i).head(2) = ex1_outlier_signal(rng).transpose();
  append_noise(outliers, 2, 0.1, rng);
  data.test.features.bottomRows(spec.n_outlier) = outliers;
  for (Eigen::Index i = 0; i < spec.n_outlier; ++i) data.test.labels.push_back(kOutlierLabel);
  return {params, std::move(data)};
}

SimulatedData generate_example2(const SimSpec& spec) {
  if (spec.n_per_class < 1 || spec.n_outlier < 1)
    throw InputError("simulation counts must be at least 1");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Eigen::Index p = 100;

  auto draw_ring = [&](double r_lo, double r_hi, Eigen::Index n) {
    Matrix rows(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double radius = r_lo + (r_hi - r_lo) * u01(rng);
      const double theta = kTwoPi * u01(rng);
      rows(i, 0) = radius * std::cos(theta);
      rows(i, 1) = radius * std::sin(theta);
    }
    append_noise(rows, 2, 1.0, rng);
    return rows;
  };

  const std::array<std::pair<double, double>, 3> radii{{{0.0, 5.0}, {4.0, 9.0}, {8.0, 13.0}}};
  SimulatedData data;
  const Eigen::Index n = spec.n_per_class;
  data.train.features.resize(3 * n, p);
  data.train.provenance = "train";
  data.train.label_names = class_names(3);
  data.test.features.resize(3 * n + spec.n_outlier, p);
  data.test.provenance = "test";
  data.test.label_names = class_names(3);
  for (int k = 0; k < 3; ++k) {
    auto [lo, hi] = radii[static_cast<std::size_t>(k)];
    data.train.features.middleRows(k * n, n) = draw_ring(lo, hi, n);
    for (Eigen::Index i = 0; i < n; ++i) data.train.labels.push_back(k);
  }
  for (int k = 0; k < 3; ++k) {
    auto [lo, hi] = radii[static_cast<std::size_t>(k)];
    data.test.features.middleRows(k * n, n) = draw_ring(lo, hi, n);
    for (Eigen::Index i = 0; i < n; ++i) data.test.labels.push_back(k);
  }
  data.test.features.bottomRows(spec.n_outlier) = draw_ring(15.0, 20.0, spec.n_outlier);
  for (Eigen::Index i = 0; i < spec.n_outlier; ++i) data.test.labels.push_back(kOutlierLabel);
  return data;
}

SimulatedData generate(const SimSpec& spec) {
  if (spec.example == SimExample::ex1) return generate_example1(spec).second;
  return generate_example2(spec);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

LabeledSet load_csv(const std::string& path, const std::string& label_column,
                    const std::string& outlier_token) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + " is empty", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);
  long label_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == label_column) label_idx = static_cast<long>(c);
  if (label_idx < 0) throw ParseError("label column '" + label_column + "' not found in " + path, 1);
  const std::size_t ncols = header.size();

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != ncols)
      throw ParseError("ragged row: expected " + std::to_string(ncols) + " fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    std::vector<double> row;
    row.reserve(ncols - 1);
    for (std::size_t c = 0; c < ncols; ++c) {
      if (static_cast<long>(c) == label_idx) {
        raw_labels.push_back(fields[c]);
        continue;
      }
      try {
        std::size_t pos = 0;
        const double v = std::stod(fields[c], &pos);
        if (pos != fields[c].size()) throw std::invalid_argument("trailing");
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("non-numeric feature value '" + fields[c] + "'", lineno);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + " has no data rows", lineno);

  LabeledSet out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(ncols - 1));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c + 1 < ncols; ++c)
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];

  for (const std::string& raw : raw_labels) {
    if (raw == outlier_token) {
      out.labels.push_back(kOutlierLabel);
      continue;
    }
    auto it = std::find(out.label_names.begin(), out.label_names.end(), raw);
    if (it == out.label_names.end()) {
      out.label_names.push_back(raw);
      out.labels.push_back(static_cast<int>(out.label_names.size()) - 1);
    } else {
      out.labels.push_back(static_cast<int>(it - out.label_names.begin()));
    }
  }
  return out;
}

void save_csv(const std::string& path, const LabeledSet& data, const std::string& outlier_token) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (Eigen::Index c = 0; c < data.dim(); ++c) out << "f" << (c + 1) << ",";
  out << "label\n";
  char buf[32];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index c = 0; c < data.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data.features(i, c));
      out << buf << ",";
    }
    const int l = data.labels[static_cast<std::size_t>(i)];
    out << (l == kOutlierLabel ? outlier_token : data.label_names[static_cast<std::size_t>(l)])
        << "\n";
  }
}

std::pair<LabeledSet, LabeledSet> subsample_protocol(const LabeledSet& full,
                                                     const std::vector<long>& per_class_sizes,
                                                     std::uint64_t seed) {
  const int k = full.num_classes();
  if (static_cast<int>(per_class_sizes.size()) != k)
    throw ConfigError("subsample_protocol: expected one size per class");
  std::mt19937_64 rng(seed);

  std::vector<bool> to_train(static_cast<std::size_t>(full.size()), false);
  for (int cls = 0; cls < k; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < to_train.size(); ++i)
      if (full.labels[i] == cls) idx.push_back(i);
    const long want = per_class_sizes[static_cast<std::size_t>(cls)];
    if (want > static_cast<long>(idx.size()))
      throw ConfigError("subsample_protocol: class " + full.label_names[static_cast<std::size_t>(cls)] +
                        " has only " + std::to_string(idx.size()) + " rows, requested " +
                        std::to_string(want));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (long i = 0; i < want; ++i) to_train[idx[static_cast<std::size_t>(i)]] = true;
  }

  auto gather = [&](bool train_part) {
    LabeledSet s;
    s.label_names = full.label_names;
    s.provenance = train_part ? "train" : "test";
    Eigen::Index count = 0;
    for (std::size_t i = 0; i < to_train.size(); ++i)
      if (to_train[i] == train_part) ++count;
    s.features.resize(count, full.dim());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < to_train.size(); ++i) {
      if (to_train[i] == train_part) {
        s.features.row(r++) = full.features.row(static_cast<Eigen::Index>(i));
        s.labels.push_back(full.labels[i]);
      }
    }
    return s;
  };
  return {gather(true), gather(false)};
}

}  // namespace gps
