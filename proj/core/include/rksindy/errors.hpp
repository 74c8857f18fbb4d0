#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rksindy {

/// Malformed input file (CSV or JSON). `line` is 1-based and refers to the
/// physical line in the file, counting the header.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Numerical blow-up: a simulation step or the optimizer produced a
/// non-finite or absurdly large value. `index` identifies the first bad
/// sample (simulation) or iteration (optimization).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t index)
      : std::runtime_error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
  [[nodiscard]] std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// A dictionary feature evaluated to NaN or infinity outside the guarded
/// optimization path, where this is a caller error rather than a transient.
class NonFiniteFeatureError : public std::runtime_error {
 public:
  NonFiniteFeatureError(const std::string& what, std::size_t feature)
      : std::runtime_error(what + " (feature " + std::to_string(feature) + ")"),
        feature_(feature) {}
  [[nodiscard]] std::size_t feature() const { return feature_; }

 private:
  std::size_t feature_;
};

/// Mismatched dimensions between data, dictionary, and coefficients.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fewer samples than an operation needs (e.g. one sample cannot form a
/// prediction pair).
class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rksindy
