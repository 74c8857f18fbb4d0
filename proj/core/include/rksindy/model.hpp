#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rksindy/dictionary.hpp"
#include "rksindy/matrix.hpp"

namespace rksindy {

/// Coefficients of one dictionary block: values is D x n (feature x state
/// equation) and mask marks trainable entries. Masked entries are pinned to
/// exactly zero and never updated.
struct CoefficientMatrix {
  Matrix values;
  std::vector<std::uint8_t> mask;  // row-major, parallel to values

  CoefficientMatrix() = default;
  CoefficientMatrix(std::size_t num_features, std::size_t num_equations)
      : values(num_features, num_equations), mask(num_features * num_equations, 1) {}

  [[nodiscard]] bool active(std::size_t i, std::size_t j) const {
    return mask[i * values.cols() + j] != 0;
  }
  void deactivate(std::size_t i, std::size_t j) {
    mask[i * values.cols() + j] = 0;
    values(i, j) = 0.0;
  }

  [[nodiscard]] std::size_t nonzero_count() const;
  /// Zeroes every masked entry (no-op when the invariant already holds).
  void enforce_mask();

  friend bool operator==(const CoefficientMatrix&, const CoefficientMatrix&) = default;
};

enum class FormVariant { plain, rational, extended };

struct ModelPart {
  Dictionary dict;
  CoefficientMatrix coeffs;

  friend bool operator==(const ModelPart&, const ModelPart&) = default;
};

/// Trainable model of the vector field.
///
///   plain      f(v) = Theta^T phi(v)
///   rational   f_k(v) = g_k(v) / (c + h_k(v))        componentwise
///   extended   f_k(v) = k_k(v) + g_k(v) / (c + h_k(v))
///
/// where g, h, k are dictionary expansions with their own coefficients, the
/// denominator dictionary carries no constant feature, and c is 1 for models
/// in training form (denormalization may rescale it).
struct ModelForm {
  FormVariant variant = FormVariant::plain;
  std::size_t state_dim = 0;

  ModelPart linear;       // plain / extended direct part
  ModelPart numerator;    // rational / extended
  ModelPart denominator;  // rational / extended, no constant feature
  double denominator_constant = 1.0;

  [[nodiscard]] bool has_linear() const { return variant != FormVariant::rational; }
  [[nodiscard]] bool has_rational() const { return variant != FormVariant::plain; }

  [[nodiscard]] std::size_t nonzero_count() const;
  void validate() const;

  friend bool operator==(const ModelForm&, const ModelForm&) = default;
};

ModelForm make_plain_form(Dictionary dict, std::size_t state_dim);
ModelForm make_rational_form(Dictionary numerator_dict, Dictionary denominator_dict,
                             std::size_t state_dim);
ModelForm make_extended_form(Dictionary linear_dict, Dictionary numerator_dict,
                             Dictionary denominator_dict, std::size_t state_dim);

/// Evaluates f(v). Returns false instead of throwing when a feature is
/// non-finite or a denominator magnitude falls below `denominator_floor`;
/// the caller decides whether that poisons a prediction or is fatal.
[[nodiscard]] bool eval_field(const ModelForm& form, std::span<const double> v,
                              std::span<double> f, double denominator_floor);

/// f(v) plus the Jacobian df/dx restricted to the state block (first
/// state_dim variables of v). Same failure convention as eval_field.
[[nodiscard]] bool eval_field_jacobian(const ModelForm& form, std::span<const double> v,
                                       std::span<double> f, Matrix& jacobian,
                                       double denominator_floor);

/// Adapts the model to the VectorField signature for simulation; inputs are
/// absent and `params` is appended to the state when the dictionaries expect
/// augmented variables. Throws DivergenceError on evaluation failure.
class ModelField {
 public:
  explicit ModelField(const ModelForm& form, std::vector<double> params = {},
                      double denominator_floor = 1e-3);
  void operator()(std::span<const double> x, std::span<double> dx) const;

 private:
  const ModelForm* form_;
  std::vector<double> params_;
  double floor_;
  mutable std::vector<double> aug_;
};

}  // namespace rksindy
