#pragma once

// Internal workspace-based evaluation of a ModelForm at one augmented point.
// The optimizer calls this once per stage per pair row, so everything here
// is allocation-free after the initial resize.

#include <cmath>
#include <span>
#include <vector>

#include "rksindy/matrix.hpp"
#include "rksindy/model.hpp"

namespace rksindy::detail {

struct StageRecord {
  std::vector<double> v;  // augmented point the stage was evaluated at

  std::vector<double> phi_lin, phi_num, phi_den;
  Matrix grad_lin, grad_num, grad_den;  // feature x state_dim

  std::vector<double> num, den;  // per-equation numerator / denominator values
  std::vector<double> f;         // field value, state_dim
  Matrix jac;                    // state_dim x state_dim

  void resize(const ModelForm& form, std::size_t aug_dim) {
    const std::size_t n = form.state_dim;
    auto ensure = [](Matrix& m, std::size_t r, std::size_t c) {
      if (m.rows() != r || m.cols() != c) m = Matrix(r, c);
    };
    v.resize(aug_dim);
    f.resize(n);
    ensure(jac, n, n);
    if (form.has_linear()) {
      phi_lin.resize(form.linear.dict.size());
      ensure(grad_lin, form.linear.dict.size(), n);
    }
    if (form.has_rational()) {
      phi_num.resize(form.numerator.dict.size());
      phi_den.resize(form.denominator.dict.size());
      ensure(grad_num, form.numerator.dict.size(), n);
      ensure(grad_den, form.denominator.dict.size(), n);
      num.resize(n);
      den.resize(n);
    }
  }
};

// theta^T phi for one part, accumulated into out (size n).
inline void accumulate_part(const ModelPart& part, std::span<const double> phi,
                            std::span<double> out) {
  const std::size_t d = part.dict.size();
  const std::size_t n = part.coeffs.values.cols();
  const double* theta = part.coeffs.values.data();
  for (std::size_t j = 0; j < d; ++j) {
    const double pj = phi[j];
    if (pj == 0.0) continue;
    const double* row = theta + j * n;
    for (std::size_t k = 0; k < n; ++k) out[k] += pj * row[k];
  }
}

// d(theta^T phi)/dv for one part, accumulated into jac (n x n): the factor
// against grad row j is the coefficient row j.
inline void accumulate_part_jacobian(const ModelPart& part, const Matrix& grad, Matrix& jac,
                                     std::span<const double> equation_weight = {}) {
  const std::size_t d = part.dict.size();
  const std::size_t n = part.coeffs.values.cols();
  const double* theta = part.coeffs.values.data();
  for (std::size_t j = 0; j < d; ++j) {
    const double* g = grad.data() + j * n;
    const double* row = theta + j * n;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = equation_weight.empty() ? row[k] : row[k] * equation_weight[k];
      if (c == 0.0) continue;
      double* jrow = jac.data() + k * n;
      for (std::size_t i = 0; i < n; ++i) jrow[i] += c * g[i];
    }
  }
}

// Field value only. Returns false when a feature is non-finite or a
// denominator magnitude drops below the floor.
inline bool eval_stage_values(const ModelForm& form, std::span<const double> point,
                              double denominator_floor, StageRecord& rec) {
  const std::size_t n = form.state_dim;
  rec.v.assign(point.begin(), point.end());
  std::fill(rec.f.begin(), rec.f.end(), 0.0);

  bool ok = true;
  if (form.has_linear()) {
    ok = evaluate_nothrow(form.linear.dict, point, rec.phi_lin) && ok;
    accumulate_part(form.linear, rec.phi_lin, rec.f);
  }
  if (form.has_rational()) {
    ok = evaluate_nothrow(form.numerator.dict, point, rec.phi_num) && ok;
    ok = evaluate_nothrow(form.denominator.dict, point, rec.phi_den) && ok;
    std::fill(rec.num.begin(), rec.num.end(), 0.0);
    std::fill(rec.den.begin(), rec.den.end(), form.denominator_constant);
    accumulate_part(form.numerator, rec.phi_num, rec.num);
    accumulate_part(form.denominator, rec.phi_den, rec.den);
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(rec.den[k]) < denominator_floor) return false;
      rec.f[k] += rec.num[k] / rec.den[k];
    }
  }
  if (!ok) return false;
  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(rec.f[k])) return false;
  return true;
}

// Field value plus state Jacobian plus everything the parameter-gradient
// sweep needs (feature values, gradients, per-equation num/den).
inline bool eval_stage_full(const ModelForm& form, std::span<const double> point,
                            double denominator_floor, StageRecord& rec) {
  const std::size_t n = form.state_dim;
  rec.v.assign(point.begin(), point.end());
  std::fill(rec.f.begin(), rec.f.end(), 0.0);
  std::fill(rec.jac.data(), rec.jac.data() + n * n, 0.0);

  bool ok = true;
  if (form.has_linear()) {
    ok = evaluate_with_gradient(form.linear.dict, point, n, rec.phi_lin, rec.grad_lin) && ok;
    accumulate_part(form.linear, rec.phi_lin, rec.f);
    accumulate_part_jacobian(form.linear, rec.grad_lin, rec.jac);
  }
  if (form.has_rational()) {
    ok = evaluate_with_gradient(form.numerator.dict, point, n, rec.phi_num, rec.grad_num) && ok;
    ok = evaluate_with_gradient(form.denominator.dict, point, n, rec.phi_den, rec.grad_den) && ok;
    std::fill(rec.num.begin(), rec.num.end(), 0.0);
    std::fill(rec.den.begin(), rec.den.end(), form.denominator_constant);
    accumulate_part(form.numerator, rec.phi_num, rec.num);
    accumulate_part(form.denominator, rec.phi_den, rec.den);
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(rec.den[k]) < denominator_floor) return false;
      rec.f[k] += rec.num[k] / rec.den[k];
    }
    // d(num_k/den_k)/dv_i = (num_k' den_k - num_k den_k') / den_k^2,
    // assembled as two weighted part-Jacobian passes.
    thread_local std::vector<double> w1, w2;
    w1.resize(n);
    w2.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      w1[k] = 1.0 / rec.den[k];
      w2[k] = -rec.num[k] / (rec.den[k] * rec.den[k]);
    }
    accumulate_part_jacobian(form.numerator, rec.grad_num, rec.jac, w1);
    accumulate_part_jacobian(form.denominator, rec.grad_den, rec.jac, w2);
  }
  if (!ok) return false;
  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(rec.f[k])) return false;
  return true;
}

}  // namespace rksindy::detail
