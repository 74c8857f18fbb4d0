// Command line front end: generate benchmark data, run discovery, compare
// against the derivative-based baseline, and emit plot-ready artifacts.
//
// Exit codes: 0 success, 1 numerical failure, 2 configuration error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rksindy/baseline.hpp"
#include "rksindy/benchmarks.hpp"
#include "rksindy/errors.hpp"
#include "rksindy/model.hpp"
#include "rksindy/preprocess.hpp"
#include "rksindy/regression.hpp"
#include "rksindy/render.hpp"
#include "rksindy/rk4.hpp"
#include "rksindy/serialize.hpp"
#include "rksindy/sparsify.hpp"
#include "rksindy/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rksindy;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ───────────────────────── option collection ─────────────────────────

// Raw option values; every field is optional so "was it given" survives the
// merge. Flags override the config file, the file overrides preset defaults.
struct Options {
  std::optional<std::string> benchmark;
  std::vector<std::string> data;
  std::optional<double> dt, t_final, noise, lambda, tol;
  std::optional<std::uint64_t> seed;
  std::optional<int> dict_degree, filter_window, filter_order, backward;
  std::optional<std::string> form, mode, normalize, rk4_weights, out;
  json dictionary;     // dictionary spec object, config file only
  json optimizer;      // optimizer knobs (incl. l1_weight), config file only
  json normalization;  // {"shift": [...], "scale": [...]}, config file only
};

void merge_file_options(const fs::path& path, Options& opt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");

  auto str = [&](const char* key, std::optional<std::string>& slot) {
    if (cfg.contains(key) && !slot) slot = cfg.at(key).get<std::string>();
  };
  auto num = [&](const char* key, std::optional<double>& slot) {
    if (cfg.contains(key) && !slot) slot = cfg.at(key).get<double>();
  };
  auto integer = [&](const char* key, std::optional<int>& slot) {
    if (cfg.contains(key) && !slot) slot = cfg.at(key).get<int>();
  };

  str("benchmark", opt.benchmark);
  if (cfg.contains("data") && opt.data.empty()) {
    if (cfg.at("data").is_string())
      opt.data.push_back(cfg.at("data").get<std::string>());
    else
      opt.data = cfg.at("data").get<std::vector<std::string>>();
  }
  num("dt", opt.dt);
  num("t_final", opt.t_final);
  num("noise", opt.noise);
  num("lambda", opt.lambda);
  num("tol", opt.tol);
  if (cfg.contains("seed") && !opt.seed) opt.seed = cfg.at("seed").get<std::uint64_t>();
  integer("dict_degree", opt.dict_degree);
  integer("filter_window", opt.filter_window);
  integer("filter_order", opt.filter_order);
  if (cfg.contains("backward") && !opt.backward)
    opt.backward = cfg.at("backward").get<bool>() ? 1 : 0;
  str("form", opt.form);
  str("mode", opt.mode);
  str("normalize", opt.normalize);
  str("rk4_weights", opt.rk4_weights);
  str("out", opt.out);
  if (cfg.contains("dictionary")) opt.dictionary = cfg.at("dictionary");
  if (cfg.contains("optimizer")) opt.optimizer = cfg.at("optimizer");
  if (cfg.contains("normalization")) opt.normalization = cfg.at("normalization");

  static const std::vector<std::string> known = {
      "benchmark", "data",          "dt",           "t_final",      "noise",
      "seed",      "dict_degree",   "form",         "mode",         "lambda",
      "tol",       "backward",      "filter_window", "filter_order", "normalize",
      "out",       "rk4_weights",   "dictionary",   "optimizer",    "normalization"};
  for (const auto& [key, value] : cfg.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key \"" + key + "\"");
}

// ───────────────────────── resolved run ─────────────────────────

struct Effective {
  const BenchmarkSpec* spec = nullptr;  // null when data comes from files
  std::vector<std::string> data_files;
  double dt = 0.0;
  double t_final = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  int dict_degree = 3;
  int denominator_degree = 0;
  bool dict_constant = true;
  FormVariant form = FormVariant::plain;
  ThresholdMode mode = ThresholdMode::fixed;
  double lambda = 5e-2;
  double tol = 0.0;
  bool backward = true;
  int filter_window = 0;  // 0 disables filtering
  int filter_order = 3;
  NormalizeMode norm_mode = NormalizeMode::off;
  std::optional<NormalizationRecord> custom_record;
  fs::path out = "out";
  LossConfig loss;
  OptimizerConfig opt;
  json dictionary_spec;  // null unless the config file supplied one
};

FormVariant parse_form(const std::string& text) {
  if (text == "plain") return FormVariant::plain;
  if (text == "rational") return FormVariant::rational;
  if (text == "extended") return FormVariant::extended;
  throw ConfigError("unknown form \"" + text + "\" (plain|rational|extended)");
}

NormalizeMode resolve_normalize(const std::string& text, const Effective& e) {
  if (text == "off") return NormalizeMode::off;
  if (text == "auto") return e.spec ? e.spec->normalize : NormalizeMode::off;
  if (text == "custom") return NormalizeMode::custom;
  throw ConfigError("unknown normalize mode \"" + text + "\" (auto|off|custom)");
}

Effective resolve(const Options& opt) {
  Effective e;
  if (opt.benchmark && !opt.data.empty())
    throw ConfigError("exactly one data source: --benchmark or --data, not both");
  if (!opt.benchmark && opt.data.empty())
    throw ConfigError("a data source is required: --benchmark NAME or --data FILE");

  if (opt.benchmark) {
    try {
      e.spec = &get_benchmark(*opt.benchmark);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
    e.dt = e.spec->default_dt;
    e.t_final = e.spec->default_t_final;
    e.noise = e.spec->default_noise;
    e.dict_degree = e.spec->dict_degree;
    e.denominator_degree = e.spec->denominator_degree;
    e.dict_constant = e.spec->dict_constant;
    e.form = e.spec->form;
    e.mode = e.spec->mode;
    e.lambda = e.spec->lambda;
    e.tol = e.spec->tol;
    e.backward = e.spec->use_backward;
    e.norm_mode = e.spec->normalize;
    e.custom_record = e.spec->custom_normalization;
    e.opt = e.spec->optimizer;
  } else {
    e.data_files = opt.data;
  }

  if (opt.dt) e.dt = *opt.dt;
  if (opt.t_final) e.t_final = *opt.t_final;
  if (opt.noise) e.noise = *opt.noise;
  if (opt.seed) e.seed = *opt.seed;
  if (opt.dict_degree) {
    e.dict_degree = *opt.dict_degree;
    if (e.denominator_degree > 0 || (opt.form && *opt.form != "plain"))
      e.denominator_degree = *opt.dict_degree;
  }
  if (opt.form) {
    e.form = parse_form(*opt.form);
    if (e.form != FormVariant::plain && e.denominator_degree == 0)
      e.denominator_degree = e.dict_degree;
  }
  if (opt.mode) {
    if (*opt.mode == "fixed")
      e.mode = ThresholdMode::fixed;
    else if (*opt.mode == "iterative")
      e.mode = ThresholdMode::iterative;
    else
      throw ConfigError("unknown mode \"" + *opt.mode + "\" (fixed|iterative)");
  }
  if (opt.lambda) e.lambda = *opt.lambda;
  if (opt.tol) e.tol = *opt.tol;
  if (opt.backward) {
    if (*opt.backward != 0 && *opt.backward != 1)
      throw ConfigError("--backward takes 0 or 1");
    e.backward = *opt.backward == 1;
  }
  if (opt.filter_window) e.filter_window = *opt.filter_window;
  if (opt.filter_order) e.filter_order = *opt.filter_order;
  e.norm_mode = resolve_normalize(opt.normalize.value_or("auto"), e);
  if (opt.out) e.out = *opt.out;

  if (!opt.normalization.is_null()) {
    NormalizationRecord rec;
    rec.shift = opt.normalization.at("shift").get<std::vector<double>>();
    rec.scale = opt.normalization.at("scale").get<std::vector<double>>();
    rec.custom = true;
    e.custom_record = rec;
  }
  if (e.norm_mode == NormalizeMode::custom && !e.custom_record)
    throw ConfigError("normalize=custom needs a preset transform or a \"normalization\" entry");

  if (opt.rk4_weights) {
    if (*opt.rk4_weights == "classical")
      e.loss.weights = Rk4Weights::classical;
    else if (*opt.rk4_weights == "uniform")
      e.loss.weights = Rk4Weights::uniform;
    else
      throw ConfigError("unknown rk4 weights \"" + *opt.rk4_weights + "\" (classical|uniform)");
  }
  e.loss.use_backward = e.backward;

  if (!opt.optimizer.is_null()) {
    const json& o = opt.optimizer;
    auto knob = [&](const char* key, auto& slot) {
      if (o.contains(key)) slot = o.at(key).get<std::decay_t<decltype(slot)>>();
    };
    knob("learning_rate", e.opt.learning_rate);
    knob("max_iters", e.opt.max_iters);
    knob("rel_tol", e.opt.rel_tol);
    knob("window", e.opt.window);
    knob("stall_tol", e.opt.stall_tol);
    knob("decay", e.opt.decay);
    knob("min_learning_rate", e.opt.min_learning_rate);
    knob("divergence_limit", e.opt.divergence_limit);
    knob("l1_weight", e.loss.l1_weight);
  }
  e.dictionary_spec = opt.dictionary;

  if (e.dt <= 0.0 && e.spec == nullptr && !opt.dt)
    e.dt = 0.0;  // file data carries its own grid
  return e;
}

json provenance_json(const std::string& command, const Effective& e) {
  json p;
  p["command"] = command;
  if (e.spec) p["benchmark"] = e.spec->name;
  if (!e.data_files.empty()) p["data"] = e.data_files;
  if (e.spec) {
    p["dt"] = e.dt;
    p["t_final"] = e.t_final;
    p["noise"] = e.noise;
  }
  p["seed"] = e.seed;
  p["dict_degree"] = e.dict_degree;
  if (e.form != FormVariant::plain) p["denominator_degree"] = e.denominator_degree;
  p["form"] = e.form == FormVariant::plain      ? "plain"
              : e.form == FormVariant::rational ? "rational"
                                                : "extended";
  p["mode"] = e.mode == ThresholdMode::fixed ? "fixed" : "iterative";
  p["lambda"] = e.lambda;
  p["tol"] = e.tol;
  p["backward"] = e.backward;
  p["filter_window"] = e.filter_window;
  p["filter_order"] = e.filter_order;
  p["normalize"] = e.norm_mode == NormalizeMode::off      ? "off"
                   : e.norm_mode == NormalizeMode::custom ? "custom"
                                                          : "statistical";
  p["rk4_weights"] = e.loss.weights == Rk4Weights::classical ? "classical" : "uniform";
  p["l1_weight"] = e.loss.l1_weight;
  p["optimizer"] = {{"learning_rate", e.opt.learning_rate},
                    {"max_iters", e.opt.max_iters},
                    {"rel_tol", e.opt.rel_tol},
                    {"window", e.opt.window},
                    {"stall_tol", e.opt.stall_tol},
                    {"decay", e.opt.decay},
                    {"min_learning_rate", e.opt.min_learning_rate},
                    {"divergence_limit", e.opt.divergence_limit}};
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

// ───────────────────────── shared pipeline ─────────────────────────

TrajectorySet acquire_data(const Effective& e) {
  if (e.spec) return simulate_benchmark(*e.spec, e.dt, e.t_final, e.noise, e.seed);
  TrajectorySet set;
  for (const auto& file : e.data_files) {
    if (!fs::exists(file)) throw ConfigError("data file not found: " + file);
    set.items.push_back(load_csv(file));
  }
  set.validate();
  if (e.noise > 0.0) return add_gaussian_noise(set, e.noise, e.seed);
  return set;
}

struct Prepared {
  TrajectorySet raw;       // as observed (post-noise), for overlays and RMSE
  TrajectorySet fit;       // filtered + normalized, what discovery sees
  NormalizationRecord record;
  std::vector<std::string> warnings;
};

Prepared prepare(const Effective& e) {
  Prepared p;
  p.raw = acquire_data(e);
  p.fit = p.raw;
  if (e.filter_window > 1) p.fit = savgol_filter(p.fit, e.filter_window, e.filter_order);
  switch (e.norm_mode) {
    case NormalizeMode::off:
    case NormalizeMode::automatic: {
      p.record.shift.assign(p.fit.state_dim(), 0.0);
      p.record.scale.assign(p.fit.state_dim(), 1.0);
      break;
    }
    case NormalizeMode::statistical: {
      auto [normed, rec] = normalize(p.fit, &p.warnings);
      p.fit = std::move(normed);
      p.record = rec;
      break;
    }
    case NormalizeMode::custom: {
      p.record = *e.custom_record;
      p.fit = apply_normalization(p.fit, p.record);
      break;
    }
  }
  return p;
}

ModelForm build_form(const Effective& e, const TrajectorySet& data) {
  const std::size_t num_vars = data.state_dim() + data.input_dim() + data.param_dim();

  if (!e.dictionary_spec.is_null()) {
    std::vector<std::string> names;
    if (e.spec) {
      names = e.spec->variable_names;
      for (const auto& n : e.spec->param_names) names.push_back(n);
    }
    Dictionary dict = dictionary_from_spec(e.dictionary_spec.dump(), num_vars, names);
    if (e.form != FormVariant::plain)
      throw ConfigError("custom dictionary specs drive plain forms only");
    return make_plain_form(std::move(dict), data.state_dim());
  }

  const bool preset_shape = e.spec && e.dict_degree == e.spec->dict_degree &&
                            e.form == e.spec->form &&
                            e.denominator_degree == e.spec->denominator_degree;
  if (preset_shape) return benchmark_form(*e.spec);

  auto named = [&](Dictionary dict) {
    if (e.spec) {
      dict.variable_names = e.spec->variable_names;
      for (const auto& n : e.spec->param_names) dict.variable_names.push_back(n);
    }
    return dict;
  };
  switch (e.form) {
    case FormVariant::plain:
      return make_plain_form(
          named(build_polynomial_dictionary(num_vars, e.dict_degree, e.dict_constant)),
          data.state_dim());
    case FormVariant::rational:
      return make_rational_form(
          named(build_polynomial_dictionary(num_vars, e.dict_degree, e.dict_constant)),
          named(build_polynomial_dictionary(num_vars, e.denominator_degree, false)),
          data.state_dim());
    case FormVariant::extended:
      return make_extended_form(
          named(build_polynomial_dictionary(num_vars, e.dict_degree, e.dict_constant)),
          named(build_polynomial_dictionary(num_vars, e.dict_degree, e.dict_constant)),
          named(build_polynomial_dictionary(num_vars, e.denominator_degree, false)),
          data.state_dim());
  }
  throw ConfigError("unknown form variant");
}

std::vector<PredictionPair> build_pair_list(const TrajectorySet& fit, bool backward) {
  std::vector<PredictionPair> pairs;
  pairs.push_back(build_pairs(fit, PairDirection::forward));
  if (backward) pairs.push_back(build_pairs(fit, PairDirection::backward));
  return pairs;
}

DiscoveredModel run_discovery(const Effective& e, const Prepared& p) {
  ModelForm form = build_form(e, p.fit);
  auto pairs = build_pair_list(p.fit, e.backward);
  ridge_warm_start(form, pairs.front());
  DiscoveredModel model = e.mode == ThresholdMode::fixed
                              ? fixed_cutoff_discover(form, pairs, e.loss, e.opt, e.lambda)
                              : iterative_cutoff_discover(form, pairs, e.loss, e.opt, e.tol);
  model.normalization = p.record;
  for (const auto& w : p.warnings) model.warnings.push_back(w);
  return model;
}

ModelForm world_form(const DiscoveredModel& model) {
  if (model.normalization.identity()) return model.form;
  return denormalize_model(model.form, model.normalization);
}

// Simulates a world-coordinates model over the observed grid of every
// trajectory. Returns one simulated trajectory per input item; divergent
// items come back empty with a warning appended.
std::vector<Trajectory> reconstruct(const ModelForm& world, const TrajectorySet& raw,
                                    std::vector<std::string>& warnings) {
  std::vector<Trajectory> result;
  for (std::size_t k = 0; k < raw.items.size(); ++k) {
    const Trajectory& traj = raw.items[k];
    std::vector<double> x0(traj.state_dim());
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = traj.states(0, i);
    try {
      ModelField field(world, traj.params);
      result.push_back(simulate_reference(
          [&](std::span<const double> x, std::span<double> dx) { field(x, dx); }, x0,
          traj.times, 10));
      result.back().params = traj.params;
    } catch (const DivergenceError& err) {
      warnings.push_back("reconstruction of trajectory " + std::to_string(k) +
                         " diverged: " + err.what());
      result.emplace_back();
    }
  }
  return result;
}

double reconstruction_rmse(const ModelForm& world, const TrajectorySet& raw) {
  std::vector<std::string> scratch;
  auto sims = reconstruct(world, raw, scratch);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < sims.size(); ++k) {
    if (sims[k].num_samples() == 0) return std::numeric_limits<double>::infinity();
    const Trajectory& obs = raw.items[k];
    for (std::size_t r = 0; r < obs.num_samples(); ++r)
      for (std::size_t c = 0; c < obs.state_dim(); ++c) {
        const double d = sims[k].states(r, c) - obs.states(r, c);
        acc += d * d;
        ++count;
      }
  }
  if (!std::isfinite(acc)) return std::numeric_limits<double>::infinity();
  return std::sqrt(acc / static_cast<double>(count));
}

// ───────────────────────── commands ─────────────────────────

int cmd_simulate(const Effective& e) {
  if (!e.spec) throw ConfigError("simulate needs --benchmark");
  const json prov = provenance_json("simulate", e);
  TrajectorySet data = acquire_data(e);
  fs::create_directories(e.out);
  for (std::size_t k = 0; k < data.items.size(); ++k) {
    const fs::path file = e.out / (e.spec->name + "_traj" + std::to_string(k) + ".csv");
    save_csv(data.items[k], file, prov.dump());
  }
  write_text(e.out / "run.json", prov.dump(2) + "\n");
  std::printf("wrote %zu trajectories to %s\n", data.items.size(), e.out.string().c_str());
  return 0;
}

int cmd_discover(const Effective& e) {
  json prov = provenance_json("discover", e);
  Prepared p = prepare(e);
  DiscoveredModel model = run_discovery(e, p);
  model.provenance = prov.dump();

  fs::create_directories(e.out);
  save_model(model, e.out / "model.json");

  std::string equations = render_equations(model, 3);
  if (!model.normalization.identity())
    equations += "\nin original coordinates:\n" + render_equations(world_form(model), 3);
  write_text(e.out / "equations.txt", equations);

  if (e.mode == ThresholdMode::iterative) write_text(e.out / "pareto.csv", pareto_to_csv(model));

  const ModelForm world = world_form(model);
  auto sims = reconstruct(world, p.raw, model.warnings);
  for (std::size_t k = 0; k < sims.size(); ++k) {
    if (sims[k].num_samples() == 0) continue;
    save_csv(sims[k], e.out / ("reconstruction_traj" + std::to_string(k) + ".csv"),
             prov.dump());
  }

  prov["warnings"] = model.warnings;
  write_text(e.out / "run.json", prov.dump(2) + "\n");
  std::printf("%s", equations.c_str());
  for (const auto& w : model.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return 0;
}

int cmd_compare(const Effective& e) {
  if (e.form != FormVariant::plain)
    throw ConfigError("compare runs on plain dictionaries (the baseline has no rational form)");
  json prov = provenance_json("compare", e);
  Prepared p = prepare(e);

  DiscoveredModel ours = run_discovery(e, p);
  ours.provenance = prov.dump();

  ModelForm our_world = world_form(ours);
  Dictionary dict = our_world.linear.dict;
  DiscoveredModel baseline = baseline_discover(p.fit, dict, e.lambda,
                                               DerivativeMethod::central_difference);
  baseline.normalization = p.record;
  baseline.provenance = prov.dump();
  ModelForm baseline_world = world_form(baseline);

  const double rmse_ours = reconstruction_rmse(our_world, p.raw);
  const double rmse_base = reconstruction_rmse(baseline_world, p.raw);

  std::string report;
  auto section = [&](const char* name, const DiscoveredModel& m, const ModelForm& world,
                     double rmse) {
    report += std::string("== ") + name + " ==\n";
    report += render_equations(m.form, 3);
    if (!m.normalization.identity())
      report += "in original coordinates:\n" + render_equations(world, 3);
    report += "active terms per equation:";
    for (std::size_t eq = 0; eq < m.form.state_dim; ++eq) {
      std::size_t n = 0;
      if (m.form.has_linear())
        for (std::size_t j = 0; j < m.form.linear.dict.size(); ++j)
          if (m.form.linear.coeffs.active(j, eq) && m.form.linear.coeffs.values(j, eq) != 0.0)
            ++n;
      report += " " + std::to_string(n);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "\ntrajectory rmse vs data: %.6g\n\n", rmse);
    report += buf;
  };
  section("rk-sindy", ours, our_world, rmse_ours);
  section("std-sindy", baseline, baseline_world, rmse_base);

  if (e.spec && e.spec->ground_truth) {
    const auto truth = e.spec->ground_truth();
    if (!truth.empty()) {
      report += "== ground truth ==\n";
      for (std::size_t eq = 0; eq < truth.size(); ++eq) {
        report += "d" + (eq < dict.variable_names.size() ? dict.variable_names[eq]
                                                         : "x" + std::to_string(eq + 1)) +
                  "/dt =";
        for (const auto& [name, value] : truth[eq]) {
          char buf[64];
          std::snprintf(buf, sizeof buf, " %+.3f %s", value, name.c_str());
          report += buf;
        }
        report += "\n";
      }
    }
  }

  fs::create_directories(e.out);
  write_text(e.out / "report.txt", report);
  save_model(ours, e.out / "model_rk.json");
  save_model(baseline, e.out / "model_baseline.json");
  write_text(e.out / "run.json", prov.dump(2) + "\n");
  std::printf("%s", report.c_str());
  return 0;
}

int cmd_assess_degree(const Effective& e, int max_degree) {
  json prov = provenance_json("assess-degree", e);
  prov["max_degree"] = max_degree;
  Prepared p = prepare(e);

  auto table = degree_assessment(p.fit, max_degree, e.loss, e.opt);
  std::string csv = "degree,loss\n";
  for (const auto& row : table) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d,%.12e\n", row.degree, row.loss_value);
    csv += buf;
  }
  fs::create_directories(e.out);
  write_text(e.out / "degree_loss.csv", csv);
  write_text(e.out / "run.json", prov.dump(2) + "\n");
  std::printf("%s", csv.c_str());
  return 0;
}

// ───────────────────────── wiring ─────────────────────────

struct SubOptions {
  Options opt;
  std::optional<std::string> positional_benchmark;
  std::optional<std::string> config_path;
};

void add_common_options(CLI::App* cmd, SubOptions& s) {
  cmd->add_option("benchmark_name", s.positional_benchmark,
                  "benchmark preset (same as --benchmark)");
  cmd->add_option("--benchmark", s.opt.benchmark, "benchmark preset name");
  cmd->add_option("--data", s.opt.data, "trajectory CSV file (repeatable)");
  cmd->add_option("--dt", s.opt.dt, "sample step for benchmark simulation");
  cmd->add_option("--t-final", s.opt.t_final, "simulation end time");
  cmd->add_option("--noise", s.opt.noise, "measurement noise sigma");
  cmd->add_option("--seed", s.opt.seed, "noise RNG seed");
  cmd->add_option("--dict-degree", s.opt.dict_degree, "polynomial dictionary degree");
  cmd->add_option("--form", s.opt.form, "model form: plain|rational|extended");
  cmd->add_option("--mode", s.opt.mode, "thresholding: fixed|iterative");
  cmd->add_option("--lambda", s.opt.lambda, "fixed-cutoff threshold");
  cmd->add_option("--tol", s.opt.tol, "iterative-mode loss tolerance");
  cmd->add_option("--backward", s.opt.backward, "use backward pairs (0|1)");
  cmd->add_option("--filter-window", s.opt.filter_window, "Savitzky-Golay window (odd, 0=off)");
  cmd->add_option("--filter-order", s.opt.filter_order, "Savitzky-Golay polynomial order");
  cmd->add_option("--normalize", s.opt.normalize, "normalization: auto|off|custom");
  cmd->add_option("--out", s.opt.out, "output directory");
  cmd->add_option("--rk4-weights", s.opt.rk4_weights, "stage weights: classical|uniform");
  cmd->add_option("--config", s.config_path, "JSON config file (flags override it)");
}

Effective finish(SubOptions& s) {
  if (s.positional_benchmark) {
    if (s.opt.benchmark && *s.opt.benchmark != *s.positional_benchmark)
      throw ConfigError("benchmark given twice with different names");
    s.opt.benchmark = s.positional_benchmark;
  }
  if (s.config_path) merge_file_options(*s.config_path, s.opt);
  return resolve(s.opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rksindy: sparse ODE discovery through one-step RK4 prediction"};
  app.require_subcommand(1);

  SubOptions sim, disc, comp, assess;
  CLI::App* c_sim = app.add_subcommand("simulate", "generate benchmark trajectory CSVs");
  add_common_options(c_sim, sim);
  CLI::App* c_disc = app.add_subcommand("discover", "fit a sparse model to trajectory data");
  add_common_options(c_disc, disc);
  CLI::App* c_comp = app.add_subcommand("compare", "run rk-sindy and std-sindy side by side");
  add_common_options(c_comp, comp);
  CLI::App* c_assess =
      app.add_subcommand("assess-degree", "dense fidelity per dictionary degree");
  add_common_options(c_assess, assess);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::optional<fs::path> out_dir;  // for divergence diagnostics
  try {
    if (c_sim->parsed()) {
      const Effective e = finish(sim);
      out_dir = e.out;
      return cmd_simulate(e);
    }
    if (c_disc->parsed()) {
      const Effective e = finish(disc);
      out_dir = e.out;
      return cmd_discover(e);
    }
    if (c_comp->parsed()) {
      const Effective e = finish(comp);
      out_dir = e.out;
      return cmd_compare(e);
    }
    const Effective e = finish(assess);
    out_dir = e.out;
    return cmd_assess_degree(e, assess.opt.dict_degree.value_or(4));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 2;
  } catch (const InsufficientDataError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    if (out_dir) {
      json diag = {{"error", "divergence"}, {"message", e.what()}, {"index", e.index()}};
      std::error_code ec;
      fs::create_directories(*out_dir, ec);
      if (!ec) {
        std::ofstream f(*out_dir / "diagnostics.json");
        f << diag.dump(2) << "\n";
      }
    }
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 1;
  }
}
