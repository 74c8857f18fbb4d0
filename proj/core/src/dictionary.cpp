#include "rksindy/dictionary.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rksindy/errors.hpp"

namespace rksindy {

void Dictionary::validate() const {
  if (num_vars == 0) throw DimensionError("dictionary needs at least one variable");
  if (features.empty()) throw std::invalid_argument("dictionary has no features");
  if (!variable_names.empty() && variable_names.size() != num_vars)
    throw DimensionError("variable name count does not match num_vars");
  for (const auto& f : features) {
    switch (f.kind) {
      case FeatureKind::constant:
        break;
      case FeatureKind::monomial:
        if (f.exponents.size() != num_vars)
          throw DimensionError("monomial exponent arity does not match num_vars");
        for (int e : f.exponents)
          if (e < 0) throw std::invalid_argument("negative monomial exponent");
        break;
      case FeatureKind::sine:
      case FeatureKind::cosine:
      case FeatureKind::exponential:
        if (f.argument.size() != num_vars)
          throw DimensionError("feature argument arity does not match num_vars");
        if (f.eta_index && (*f.eta_index < 0 || static_cast<std::size_t>(*f.eta_index) >= eta.size()))
          throw std::invalid_argument("feature references a missing eta slot");
        break;
    }
  }
}

namespace {

void enumerate_exponents(std::size_t var, int remaining, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (var + 1 == current.size()) {
    current[var] = remaining;
    out.push_back(current);
    return;
  }
  // Graded lex: earlier variables take the highest powers first.
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate_exponents(var + 1, remaining - e, current, out);
  }
}

}  // namespace

Dictionary build_polynomial_dictionary(std::size_t num_vars, int degree, bool include_constant) {
  if (num_vars == 0) throw DimensionError("dictionary needs at least one variable");
  if (degree < 0) throw std::invalid_argument("degree must be non-negative");

  Dictionary dict;
  dict.num_vars = num_vars;
  if (include_constant) dict.features.push_back({FeatureKind::constant});

  std::vector<int> current(num_vars, 0);
  for (int total = 1; total <= degree; ++total) {
    std::vector<std::vector<int>> level;
    enumerate_exponents(0, total, current, level);
    for (auto& exps : level) {
      FeatureDescriptor f;
      f.kind = FeatureKind::monomial;
      f.exponents = std::move(exps);
      dict.features.push_back(std::move(f));
    }
  }
  return dict;
}

std::size_t polynomial_dictionary_size(std::size_t num_vars, int degree) {
  // binomial(num_vars + degree, degree), computed incrementally to stay exact.
  std::size_t count = 1;
  for (int k = 1; k <= degree; ++k) count = count * (num_vars + k) / k;
  return count;
}

void add_trig_features(Dictionary& dict, double s) {
  for (std::size_t v = 0; v < dict.num_vars; ++v) {
    FeatureDescriptor f;
    f.argument.assign(dict.num_vars, 0);
    f.argument[v] = 1;
    f.scale = s;
    f.kind = FeatureKind::sine;
    dict.features.push_back(f);
    f.kind = FeatureKind::cosine;
    dict.features.push_back(f);
  }
}

void add_exp_features(Dictionary& dict, double s) {
  for (std::size_t v = 0; v < dict.num_vars; ++v) {
    FeatureDescriptor f;
    f.kind = FeatureKind::exponential;
    f.argument.assign(dict.num_vars, 0);
    f.argument[v] = 1;
    f.scale = s;
    dict.features.push_back(f);
  }
}

void add_parameterized_feature(Dictionary& dict, FeatureKind kind, std::vector<int> argument) {
  if (kind != FeatureKind::sine && kind != FeatureKind::cosine &&
      kind != FeatureKind::exponential)
    throw std::invalid_argument("parameterized features must be trig or exponential");
  if (argument.size() != dict.num_vars)
    throw DimensionError("feature argument arity does not match num_vars");
  FeatureDescriptor f;
  f.kind = kind;
  f.argument = std::move(argument);
  f.eta_index = static_cast<int>(dict.eta.size());
  dict.eta.push_back(1.0);
  dict.features.push_back(std::move(f));
}

namespace {

double int_pow(double base, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

double monomial_value(std::span<const double> v, const std::vector<int>& exps) {
  double r = 1.0;
  for (std::size_t i = 0; i < exps.size(); ++i)
    if (exps[i] != 0) r *= int_pow(v[i], exps[i]);
  return r;
}

double effective_scale(const Dictionary& dict, const FeatureDescriptor& f) {
  return f.eta_index ? dict.eta[*f.eta_index] : f.scale;
}

double feature_value(const Dictionary& dict, const FeatureDescriptor& f,
                     std::span<const double> v) {
  switch (f.kind) {
    case FeatureKind::constant:
      return 1.0;
    case FeatureKind::monomial:
      return monomial_value(v, f.exponents);
    case FeatureKind::sine:
      return std::sin(effective_scale(dict, f) * monomial_value(v, f.argument));
    case FeatureKind::cosine:
      return std::cos(effective_scale(dict, f) * monomial_value(v, f.argument));
    case FeatureKind::exponential:
      return std::exp(effective_scale(dict, f) * monomial_value(v, f.argument));
  }
  return 0.0;
}

}  // namespace

bool evaluate_nothrow(const Dictionary& dict, std::span<const double> v,
                      std::span<double> out) {
  bool ok = true;
  for (std::size_t j = 0; j < dict.features.size(); ++j) {
    out[j] = feature_value(dict, dict.features[j], v);
    ok = ok && std::isfinite(out[j]);
  }
  return ok;
}

void evaluate(const Dictionary& dict, std::span<const double> v, std::span<double> out) {
  if (v.size() != dict.num_vars) throw DimensionError("point arity does not match num_vars");
  if (out.size() != dict.size()) throw DimensionError("output size does not match dictionary");
  for (std::size_t j = 0; j < dict.features.size(); ++j) {
    out[j] = feature_value(dict, dict.features[j], v);
    if (!std::isfinite(out[j]))
      throw NonFiniteFeatureError("feature evaluated to a non-finite value", j);
  }
}

Matrix evaluate(const Dictionary& dict, const Matrix& points) {
  if (points.cols() != dict.num_vars)
    throw DimensionError("point arity does not match num_vars");
  Matrix out(points.rows(), dict.size());
  for (std::size_t r = 0; r < points.rows(); ++r) evaluate(dict, points.row(r), out.row(r));
  return out;
}

namespace {

// d/dv_i of the monomial; exponent zero in v_i means the derivative vanishes.
double monomial_partial(std::span<const double> v, const std::vector<int>& exps,
                        std::size_t i) {
  if (exps[i] == 0) return 0.0;
  double r = exps[i] * int_pow(v[i], exps[i] - 1);
  for (std::size_t j = 0; j < exps.size(); ++j)
    if (j != i && exps[j] != 0) r *= int_pow(v[j], exps[j]);
  return r;
}

}  // namespace

bool evaluate_with_gradient(const Dictionary& dict, std::span<const double> v,
                            std::size_t grad_vars, std::span<double> values, Matrix& grad) {
  bool ok = true;
  for (std::size_t j = 0; j < dict.features.size(); ++j) {
    const auto& f = dict.features[j];
    double* g = grad.data() + j * grad.cols();
    switch (f.kind) {
      case FeatureKind::constant: {
        values[j] = 1.0;
        for (std::size_t i = 0; i < grad_vars; ++i) g[i] = 0.0;
        break;
      }
      case FeatureKind::monomial: {
        values[j] = monomial_value(v, f.exponents);
        for (std::size_t i = 0; i < grad_vars; ++i) g[i] = monomial_partial(v, f.exponents, i);
        break;
      }
      default: {
        const double s = effective_scale(dict, f);
        const double m = monomial_value(v, f.argument);
        double outer, douter;  // value and derivative w.r.t. (s * m)
        if (f.kind == FeatureKind::sine) {
          outer = std::sin(s * m);
          douter = std::cos(s * m);
        } else if (f.kind == FeatureKind::cosine) {
          outer = std::cos(s * m);
          douter = -std::sin(s * m);
        } else {
          outer = std::exp(s * m);
          douter = outer;
        }
        values[j] = outer;
        for (std::size_t i = 0; i < grad_vars; ++i)
          g[i] = douter * s * monomial_partial(v, f.argument, i);
        break;
      }
    }
    ok = ok && std::isfinite(values[j]);
  }
  return ok;
}

void evaluate_eta_derivative(const Dictionary& dict, std::span<const double> v, int eta_index,
                             std::span<double> out) {
  for (std::size_t j = 0; j < dict.features.size(); ++j) {
    const auto& f = dict.features[j];
    if (!f.eta_index || *f.eta_index != eta_index) {
      out[j] = 0.0;
      continue;
    }
    const double s = dict.eta[eta_index];
    const double m = monomial_value(v, f.argument);
    switch (f.kind) {
      case FeatureKind::sine:
        out[j] = m * std::cos(s * m);
        break;
      case FeatureKind::cosine:
        out[j] = -m * std::sin(s * m);
        break;
      case FeatureKind::exponential:
        out[j] = m * std::exp(s * m);
        break;
      default:
        out[j] = 0.0;
        break;
    }
  }
}

namespace {

std::string variable_name(const Dictionary& dict, std::size_t i) {
  if (i < dict.variable_names.size()) return dict.variable_names[i];
  return "x" + std::to_string(i + 1);
}

std::string monomial_label(const Dictionary& dict, const std::vector<int>& exps) {
  std::string label;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] == 0) continue;
    if (!label.empty()) label += " ";
    label += variable_name(dict, i);
    if (exps[i] > 1) label += "^" + std::to_string(exps[i]);
  }
  return label.empty() ? "1" : label;
}

}  // namespace

std::string feature_label(const Dictionary& dict, std::size_t feature) {
  const auto& f = dict.features.at(feature);
  switch (f.kind) {
    case FeatureKind::constant:
      return "1";
    case FeatureKind::monomial:
      return monomial_label(dict, f.exponents);
    default: {
      const char* name = f.kind == FeatureKind::sine      ? "sin"
                         : f.kind == FeatureKind::cosine  ? "cos"
                                                          : "exp";
      const double s = effective_scale(dict, f);
      std::string inner = monomial_label(dict, f.argument);
      if (s == 1.0) return std::string(name) + "(" + inner + ")";
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.6g", s);
      return std::string(name) + "(" + buf + " " + inner + ")";
    }
  }
}

}  // namespace rksindy
