#pragma once

#include <filesystem>
#include <string>

#include "rksindy/dictionary.hpp"
#include "rksindy/model.hpp"
#include "rksindy/sparsify.hpp"

namespace rksindy {

/// JSON text for a discovered model: feature descriptors, coefficient
/// values, masks, etas, normalization record, Pareto history and the
/// provenance blob. load_model(save) is structurally lossless.
std::string model_to_json(const DiscoveredModel& model);
DiscoveredModel model_from_json(const std::string& text);

void save_model(const DiscoveredModel& model, const std::filesystem::path& path);
DiscoveredModel load_model(const std::filesystem::path& path);

/// Builds a dictionary from a JSON spec, e.g.
///   {"degree": 3, "constant": true, "trig": [1.0], "exp": [-1.0, -2.0],
///    "parameterized": [{"kind": "sine", "var": 0}]}
/// Trig/exp lists hold fixed scales applied to every variable;
/// parameterized entries create one trainable-scale feature with "var" or a
/// multi-index "arg". Unknown keys are a format error.
Dictionary dictionary_from_spec(const std::string& json_text, std::size_t num_vars,
                                std::vector<std::string> variable_names = {});

/// Pareto history as CSV with a "nonzero_count,loss" header.
std::string pareto_to_csv(const DiscoveredModel& model);

}  // namespace rksindy
