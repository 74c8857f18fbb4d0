#include "rksindy/serialize.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rksindy/errors.hpp"

namespace rksindy {

namespace {

using nlohmann::json;

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

std::string kind_to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::constant: return "constant";
    case FeatureKind::monomial: return "monomial";
    case FeatureKind::sine: return "sine";
    case FeatureKind::cosine: return "cosine";
    case FeatureKind::exponential: return "exponential";
  }
  return "constant";
}

FeatureKind kind_from_string(const std::string& name) {
  if (name == "constant") return FeatureKind::constant;
  if (name == "monomial") return FeatureKind::monomial;
  if (name == "sine") return FeatureKind::sine;
  if (name == "cosine") return FeatureKind::cosine;
  if (name == "exponential") return FeatureKind::exponential;
  throw FormatError("unknown feature kind \"" + name + "\"", 1);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, std::size_t expect_cols) {
  Matrix m(rows.size(), rows.empty() ? expect_cols : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows.at(i);
    if (row.size() != m.cols()) throw FormatError("ragged matrix rows", 1);
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = row.at(j).get<double>();
  }
  return m;
}

json dictionary_to_json(const Dictionary& dict) {
  json out;
  out["num_vars"] = dict.num_vars;
  out["variable_names"] = dict.variable_names;
  out["eta"] = dict.eta;
  json features = json::array();
  for (const auto& f : dict.features) {
    json jf;
    jf["kind"] = kind_to_string(f.kind);
    if (f.kind == FeatureKind::monomial) jf["exponents"] = f.exponents;
    if (f.kind == FeatureKind::sine || f.kind == FeatureKind::cosine ||
        f.kind == FeatureKind::exponential) {
      jf["argument"] = f.argument;
      jf["scale"] = f.scale;
      if (f.eta_index) jf["eta_index"] = *f.eta_index;
    }
    features.push_back(std::move(jf));
  }
  out["features"] = std::move(features);
  return out;
}

Dictionary dictionary_from_json(const json& in) {
  Dictionary dict;
  dict.num_vars = in.at("num_vars").get<std::size_t>();
  dict.variable_names = in.value("variable_names", std::vector<std::string>{});
  dict.eta = in.value("eta", std::vector<double>{});
  for (const auto& jf : in.at("features")) {
    FeatureDescriptor f;
    f.kind = kind_from_string(jf.at("kind").get<std::string>());
    if (f.kind == FeatureKind::monomial) f.exponents = jf.at("exponents").get<std::vector<int>>();
    if (f.kind == FeatureKind::sine || f.kind == FeatureKind::cosine ||
        f.kind == FeatureKind::exponential) {
      f.argument = jf.at("argument").get<std::vector<int>>();
      f.scale = jf.value("scale", 1.0);
      if (jf.contains("eta_index")) f.eta_index = jf.at("eta_index").get<int>();
    }
    dict.features.push_back(std::move(f));
  }
  return dict;
}

json part_to_json(const ModelPart& part) {
  json out;
  out["dict"] = dictionary_to_json(part.dict);
  out["values"] = matrix_to_json(part.coeffs.values);
  json mask = json::array();
  const std::size_t cols = part.coeffs.values.cols();
  for (std::size_t j = 0; j < part.coeffs.values.rows(); ++j) {
    json row = json::array();
    for (std::size_t k = 0; k < cols; ++k) row.push_back(part.coeffs.active(j, k) ? 1 : 0);
    mask.push_back(std::move(row));
  }
  out["mask"] = std::move(mask);
  return out;
}

ModelPart part_from_json(const json& in) {
  ModelPart part;
  part.dict = dictionary_from_json(in.at("dict"));
  part.coeffs.values = matrix_from_json(in.at("values"), 0);
  const auto& mask = in.at("mask");
  part.coeffs.mask.assign(part.coeffs.values.rows() * part.coeffs.values.cols(), 1);
  if (mask.size() != part.coeffs.values.rows()) throw FormatError("mask shape mismatch", 1);
  for (std::size_t j = 0; j < mask.size(); ++j) {
    const auto& row = mask.at(j);
    if (row.size() != part.coeffs.values.cols()) throw FormatError("mask shape mismatch", 1);
    for (std::size_t k = 0; k < row.size(); ++k)
      if (row.at(k).get<int>() == 0) part.coeffs.deactivate(j, k);
  }
  return part;
}

std::string variant_to_string(FormVariant v) {
  switch (v) {
    case FormVariant::plain: return "plain";
    case FormVariant::rational: return "rational";
    case FormVariant::extended: return "extended";
  }
  return "plain";
}

FormVariant variant_from_string(const std::string& name) {
  if (name == "plain") return FormVariant::plain;
  if (name == "rational") return FormVariant::rational;
  if (name == "extended") return FormVariant::extended;
  throw FormatError("unknown form variant \"" + name + "\"", 1);
}

json form_to_json(const ModelForm& form) {
  json out;
  out["variant"] = variant_to_string(form.variant);
  out["state_dim"] = form.state_dim;
  if (form.has_linear()) out["linear"] = part_to_json(form.linear);
  if (form.has_rational()) {
    out["numerator"] = part_to_json(form.numerator);
    out["denominator"] = part_to_json(form.denominator);
    out["denominator_constant"] = form.denominator_constant;
  }
  return out;
}

ModelForm form_from_json(const json& in) {
  ModelForm form;
  form.variant = variant_from_string(in.at("variant").get<std::string>());
  form.state_dim = in.at("state_dim").get<std::size_t>();
  if (form.has_linear()) form.linear = part_from_json(in.at("linear"));
  if (form.has_rational()) {
    form.numerator = part_from_json(in.at("numerator"));
    form.denominator = part_from_json(in.at("denominator"));
    form.denominator_constant = in.value("denominator_constant", 1.0);
  }
  return form;
}

}  // namespace

std::string model_to_json(const DiscoveredModel& model) {
  json out;
  out["schema"] = "rksindy-model-v1";
  out["method"] = model.method;
  out["form"] = form_to_json(model.form);
  out["normalization"] = {{"shift", model.normalization.shift},
                          {"scale", model.normalization.scale},
                          {"custom", model.normalization.custom}};
  json pareto = json::array();
  for (const auto& point : model.pareto)
    pareto.push_back({{"nonzero_count", point.nonzero_count},
                      {"loss", point.loss_value},
                      {"form", form_to_json(point.snapshot)}});
  out["pareto"] = std::move(pareto);
  out["selected_index"] = model.selected_index;
  out["warnings"] = model.warnings;
  if (model.provenance.empty()) {
    out["provenance"] = nullptr;
  } else {
    json prov = json::parse(model.provenance, nullptr, false);
    out["provenance"] = prov.is_discarded() ? json(model.provenance) : prov;
  }
  return out.dump(2);
}

DiscoveredModel model_from_json(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), line_of_byte(text, e.byte));
  }
  try {
    DiscoveredModel model;
    model.method = in.value("method", std::string("rk-sindy"));
    model.form = form_from_json(in.at("form"));
    if (in.contains("normalization")) {
      const auto& norm = in.at("normalization");
      model.normalization.shift = norm.value("shift", std::vector<double>{});
      model.normalization.scale = norm.value("scale", std::vector<double>{});
      model.normalization.custom = norm.value("custom", false);
    }
    for (const auto& jp : in.value("pareto", json::array())) {
      ParetoPoint point;
      point.nonzero_count = jp.at("nonzero_count").get<std::size_t>();
      point.loss_value = jp.at("loss").get<double>();
      point.snapshot = form_from_json(jp.at("form"));
      model.pareto.push_back(std::move(point));
    }
    model.selected_index = in.value("selected_index", std::size_t{0});
    model.warnings = in.value("warnings", std::vector<std::string>{});
    if (in.contains("provenance") && !in.at("provenance").is_null()) {
      const auto& prov = in.at("provenance");
      model.provenance = prov.is_string() ? prov.get<std::string>() : prov.dump();
    }
    model.form.validate();
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model document: ") + e.what(), 1);
  }
}

void save_model(const DiscoveredModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << model_to_json(model) << "\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

DiscoveredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

Dictionary dictionary_from_spec(const std::string& json_text, std::size_t num_vars,
                                std::vector<std::string> variable_names) {
  json in;
  try {
    in = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), line_of_byte(json_text, e.byte));
  }
  if (!in.is_object()) throw FormatError("dictionary spec must be a JSON object", 1);
  for (const auto& [key, value] : in.items()) {
    (void)value;
    if (key != "degree" && key != "constant" && key != "trig" && key != "exp" &&
        key != "parameterized")
      throw FormatError("unknown dictionary spec key \"" + key + "\"", 1);
  }

  try {
    const int degree = in.value("degree", 0);
    const bool constant = in.value("constant", true);
    Dictionary dict = build_polynomial_dictionary(num_vars, degree, constant);
    for (double s : in.value("trig", std::vector<double>{})) add_trig_features(dict, s);
    for (double s : in.value("exp", std::vector<double>{})) add_exp_features(dict, s);
    for (const auto& jp : in.value("parameterized", json::array())) {
      if (!jp.is_object()) throw FormatError("parameterized entries must be objects", 1);
      for (const auto& [key, value] : jp.items()) {
        (void)value;
        if (key != "kind" && key != "var" && key != "arg")
          throw FormatError("unknown parameterized feature key \"" + key + "\"", 1);
      }
      const FeatureKind kind = kind_from_string(jp.at("kind").get<std::string>());
      if (kind == FeatureKind::constant || kind == FeatureKind::monomial)
        throw FormatError("parameterized features must be sine, cosine or exponential", 1);
      std::vector<int> argument(num_vars, 0);
      if (jp.contains("var") == jp.contains("arg"))
        throw FormatError("parameterized feature needs exactly one of \"var\" or \"arg\"", 1);
      if (jp.contains("var")) {
        const auto var = jp.at("var").get<std::size_t>();
        if (var >= num_vars) throw FormatError("parameterized feature variable out of range", 1);
        argument[var] = 1;
      } else {
        const auto arg = jp.at("arg").get<std::vector<int>>();
        if (arg.size() != num_vars)
          throw FormatError("parameterized feature \"arg\" length mismatch", 1);
        argument = arg;
      }
      add_parameterized_feature(dict, kind, std::move(argument));
    }
    if (!variable_names.empty()) {
      if (variable_names.size() != num_vars)
        throw DimensionError("variable name count does not match num_vars");
      dict.variable_names = std::move(variable_names);
    }
    dict.validate();
    return dict;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed dictionary spec: ") + e.what(), 1);
  }
}

std::string pareto_to_csv(const DiscoveredModel& model) {
  std::string out = "nonzero_count,loss\n";
  char buf[64];
  for (const auto& point : model.pareto) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", point.nonzero_count, point.loss_value);
    out += buf;
  }
  return out;
}

}  // namespace rksindy
