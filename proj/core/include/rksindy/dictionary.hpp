#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rksindy/matrix.hpp"

namespace rksindy {

enum class FeatureKind { constant, monomial, sine, cosine, exponential };

/// One candidate function of the augmented variable vector
/// v = [x1..xn, u1..um, p1..pp].
///
///   constant     1
///   monomial     prod_i v_i^exponents[i]
///   sine         sin(s * m(v)),  m(v) = prod_i v_i^argument[i]
///   cosine       cos(s * m(v))
///   exponential  exp(s * m(v))
///
/// where s is the trainable eta[eta_index] when set, else the fixed `scale`.
struct FeatureDescriptor {
  FeatureKind kind = FeatureKind::constant;
  std::vector<int> exponents;  // monomial only
  std::vector<int> argument;   // trig/exp inner monomial
  double scale = 1.0;
  std::optional<int> eta_index;

  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

/// Ordered feature set over `num_vars` augmented variables, plus the shared
/// vector of trainable scale parameters eta.
struct Dictionary {
  std::size_t num_vars = 0;
  std::vector<FeatureDescriptor> features;
  std::vector<double> eta;
  std::vector<std::string> variable_names;  // defaults to x1..; used for rendering

  [[nodiscard]] std::size_t size() const { return features.size(); }

  void validate() const;

  friend bool operator==(const Dictionary&, const Dictionary&) = default;
};

/// All monomials of total degree <= `degree` in graded lexicographic order:
/// constant first (when included), then degree 1, degree 2, ... with v1
/// taking precedence inside each degree: [1, v1, v2, v1^2, v1 v2, v2^2, ...].
Dictionary build_polynomial_dictionary(std::size_t num_vars, int degree,
                                       bool include_constant = true);

/// Number of monomials of total degree <= degree in `num_vars` variables,
/// constant included: binomial(num_vars + degree, degree).
std::size_t polynomial_dictionary_size(std::size_t num_vars, int degree);

/// Appends sin(s v_i) and cos(s v_i) for every variable, fixed scale s.
void add_trig_features(Dictionary& dict, double s);
/// Appends exp(s v_i) for every variable, fixed scale s.
void add_exp_features(Dictionary& dict, double s);
/// Appends one feature kind(eta_j * m(v)) with a fresh trainable eta_j
/// initialized to 1. `argument` is the inner monomial multi-index.
void add_parameterized_feature(Dictionary& dict, FeatureKind kind, std::vector<int> argument);

/// Evaluates every feature at one point. Throws NonFiniteFeatureError if a
/// feature overflows; use evaluate_nothrow on paths that must survive wild
/// intermediate coefficients.
void evaluate(const Dictionary& dict, std::span<const double> v, std::span<double> out);
[[nodiscard]] bool evaluate_nothrow(const Dictionary& dict, std::span<const double> v,
                                    std::span<double> out);

/// Batch version: one row of features per row of `points`.
Matrix evaluate(const Dictionary& dict, const Matrix& points);

/// Features plus the feature Jacobian d phi_j / d v_i for the first
/// `grad_vars` variables (the state block). `grad` must be size() x grad_vars.
[[nodiscard]] bool evaluate_with_gradient(const Dictionary& dict, std::span<const double> v,
                                          std::size_t grad_vars, std::span<double> values,
                                          Matrix& grad);

/// d phi_j / d eta_k for each feature j that references eta_k; `out` has one
/// entry per feature and is zero for features without that eta.
void evaluate_eta_derivative(const Dictionary& dict, std::span<const double> v, int eta_index,
                             std::span<double> out);

/// Human-readable feature name, e.g. "1", "x", "x^2 y", "sin(0.437 x)".
std::string feature_label(const Dictionary& dict, std::size_t feature);

}  // namespace rksindy
