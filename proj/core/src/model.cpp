#include "rksindy/model.hpp"

#include <cmath>

#include "field_eval.hpp"
#include "rksindy/errors.hpp"

namespace rksindy {

std::size_t CoefficientMatrix::nonzero_count() const {
  std::size_t count = 0;
  for (std::size_t idx = 0; idx < mask.size(); ++idx)
    if (mask[idx] && values.data()[idx] != 0.0) ++count;
  return count;
}

void CoefficientMatrix::enforce_mask() {
  for (std::size_t idx = 0; idx < mask.size(); ++idx)
    if (!mask[idx]) values.data()[idx] = 0.0;
}

std::size_t ModelForm::nonzero_count() const {
  std::size_t count = 0;
  if (has_linear()) count += linear.coeffs.nonzero_count();
  if (has_rational())
    count += numerator.coeffs.nonzero_count() + denominator.coeffs.nonzero_count();
  return count;
}

void ModelForm::validate() const {
  if (state_dim == 0) throw DimensionError("model needs at least one state");
  auto check_part = [&](const ModelPart& part, const char* name) {
    part.dict.validate();
    if (part.coeffs.values.rows() != part.dict.size() ||
        part.coeffs.values.cols() != state_dim)
      throw DimensionError(std::string(name) + " coefficients are not D x n");
    if (part.coeffs.mask.size() != part.dict.size() * state_dim)
      throw DimensionError(std::string(name) + " mask size mismatch");
  };
  if (has_linear()) check_part(linear, "linear part");
  if (has_rational()) {
    check_part(numerator, "numerator");
    check_part(denominator, "denominator");
    for (const auto& f : denominator.dict.features)
      if (f.kind == FeatureKind::constant)
        throw std::invalid_argument("denominator dictionary must not contain the constant");
    if (numerator.dict.num_vars != denominator.dict.num_vars)
      throw DimensionError("numerator and denominator dictionaries disagree on variables");
  }
}

namespace {

ModelPart make_part(Dictionary dict, std::size_t state_dim) {
  ModelPart part;
  part.coeffs = CoefficientMatrix(dict.size(), state_dim);
  part.dict = std::move(dict);
  return part;
}

}  // namespace

ModelForm make_plain_form(Dictionary dict, std::size_t state_dim) {
  ModelForm form;
  form.variant = FormVariant::plain;
  form.state_dim = state_dim;
  form.linear = make_part(std::move(dict), state_dim);
  form.validate();
  return form;
}

ModelForm make_rational_form(Dictionary numerator_dict, Dictionary denominator_dict,
                             std::size_t state_dim) {
  ModelForm form;
  form.variant = FormVariant::rational;
  form.state_dim = state_dim;
  form.numerator = make_part(std::move(numerator_dict), state_dim);
  form.denominator = make_part(std::move(denominator_dict), state_dim);
  form.validate();
  return form;
}

ModelForm make_extended_form(Dictionary linear_dict, Dictionary numerator_dict,
                             Dictionary denominator_dict, std::size_t state_dim) {
  ModelForm form;
  form.variant = FormVariant::extended;
  form.state_dim = state_dim;
  form.linear = make_part(std::move(linear_dict), state_dim);
  form.numerator = make_part(std::move(numerator_dict), state_dim);
  form.denominator = make_part(std::move(denominator_dict), state_dim);
  form.validate();
  return form;
}

bool eval_field(const ModelForm& form, std::span<const double> v, std::span<double> f,
                double denominator_floor) {
  detail::StageRecord rec;
  rec.resize(form, v.size());
  const bool ok = detail::eval_stage_values(form, v, denominator_floor, rec);
  std::copy(rec.f.begin(), rec.f.end(), f.begin());
  return ok;
}

bool eval_field_jacobian(const ModelForm& form, std::span<const double> v, std::span<double> f,
                         Matrix& jacobian, double denominator_floor) {
  detail::StageRecord rec;
  rec.resize(form, v.size());
  const bool ok = detail::eval_stage_full(form, v, denominator_floor, rec);
  std::copy(rec.f.begin(), rec.f.end(), f.begin());
  jacobian = rec.jac;
  return ok;
}

ModelField::ModelField(const ModelForm& form, std::vector<double> params,
                       double denominator_floor)
    : form_(&form), params_(std::move(params)), floor_(denominator_floor) {}

void ModelField::operator()(std::span<const double> x, std::span<double> dx) const {
  aug_.resize(x.size() + params_.size());
  std::copy(x.begin(), x.end(), aug_.begin());
  std::copy(params_.begin(), params_.end(), aug_.begin() + x.size());
  thread_local detail::StageRecord rec;
  rec.resize(*form_, aug_.size());
  if (!detail::eval_stage_values(*form_, aug_, floor_, rec))
    throw DivergenceError("model evaluation failed", 0);
  std::copy(rec.f.begin(), rec.f.end(), dx.begin());
}

}  // namespace rksindy
