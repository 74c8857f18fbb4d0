#include "rksindy/render.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rksindy {

namespace {

std::string format_value(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

// Appends "c label" with sign-aware joining: "a - b + c ...".
void append_term(std::string& out, double value, const std::string& label, int precision) {
  if (out.empty()) {
    if (value < 0.0) out += "-";
  } else {
    out += value < 0.0 ? " - " : " + ";
  }
  out += format_value(std::abs(value), precision);
  if (label != "1") {
    out += " ";
    out += label;
  }
}

std::string part_terms(const ModelPart& part, std::size_t equation, int precision) {
  std::string out;
  for (std::size_t j = 0; j < part.dict.size(); ++j) {
    if (!part.coeffs.active(j, equation)) continue;
    append_term(out, part.coeffs.values(j, equation), feature_label(part.dict, j), precision);
  }
  return out;
}

}  // namespace

std::string render_equation(const ModelForm& form, std::size_t equation, int precision) {
  if (equation >= form.state_dim) throw std::invalid_argument("equation index out of range");

  std::string linear;
  if (form.has_linear()) linear = part_terms(form.linear, equation, precision);

  std::string rational;
  if (form.has_rational()) {
    const std::string num = part_terms(form.numerator, equation, precision);
    if (!num.empty()) {
      std::string den = format_value(form.denominator_constant, precision);
      for (std::size_t j = 0; j < form.denominator.dict.size(); ++j) {
        if (!form.denominator.coeffs.active(j, equation)) continue;
        append_term(den, form.denominator.coeffs.values(j, equation),
                    feature_label(form.denominator.dict, j), precision);
      }
      rational = "(" + num + ") / (" + den + ")";
    }
  }

  if (linear.empty() && rational.empty()) return "0";
  if (linear.empty()) return rational;
  if (rational.empty()) return linear;
  return linear + " + " + rational;
}

std::string render_equations(const ModelForm& form, int precision) {
  const Dictionary& dict = form.has_linear() ? form.linear.dict : form.numerator.dict;
  std::string out;
  for (std::size_t k = 0; k < form.state_dim; ++k) {
    const std::string var = k < dict.variable_names.size() ? dict.variable_names[k]
                                                           : "x" + std::to_string(k + 1);
    out += "d" + var + "/dt = " + render_equation(form, k, precision) + "\n";
  }
  return out;
}

std::string render_equations(const DiscoveredModel& model, int precision) {
  return render_equations(model.form, precision);
}

}  // namespace rksindy
