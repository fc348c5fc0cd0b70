#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gps {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Label id reserved for the outlier class.
constexpr int kOutlierLabel = -1;

// Thrown on malformed caller input (dimension mismatch, bad ranges).
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on bad configuration (files, grids, sizes).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when file parsing fails; carries a line number when known.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

// Thrown when an optimizer fails to produce a usable solution.
class TrainingError : public std::runtime_error {
public:
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gps
