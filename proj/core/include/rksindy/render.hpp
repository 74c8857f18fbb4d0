#pragma once

#include <string>

#include "rksindy/model.hpp"
#include "rksindy/sparsify.hpp"

namespace rksindy {

/// Renders the active terms of one equation, e.g. "-0.100 x + 2.000 y".
/// Rational parts print as "(num) / (den)". `precision` is the number of
/// fractional digits.
std::string render_equation(const ModelForm& form, std::size_t equation, int precision = 3);

/// All equations, one "d<var>/dt = ..." line each.
std::string render_equations(const ModelForm& form, int precision = 3);
std::string render_equations(const DiscoveredModel& model, int precision = 3);

}  // namespace rksindy
