#include "rksindy/benchmarks.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "rksindy/dictionary.hpp"

namespace rksindy {

namespace {

using GroundTruth = std::vector<std::vector<std::pair<std::string, double>>>;

std::vector<double> uniform_times(double dt, double t_final) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (t_final < dt) throw std::invalid_argument("t_final must cover at least one step");
  const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = static_cast<double>(k) * dt;
  return times;
}

BenchmarkSpec make_linear2d() {
  BenchmarkSpec s;
  s.name = "linear2d";
  s.description = "damped linear oscillator";
  s.state_dim = 2;
  s.variable_names = {"x", "y"};
  s.initial_conditions = {{2.0, 0.0}};
  s.default_dt = 0.01;
  s.default_t_final = 25.0;
  s.form = FormVariant::plain;
  s.dict_degree = 5;
  s.mode = ThresholdMode::fixed;
  s.lambda = 0.05;
  s.normalize = NormalizeMode::off;
  s.make_rhs = [](std::span<const double>) -> VectorField {
    return [](std::span<const double> x, std::span<double> dx) {
      dx[0] = -0.1 * x[0] + 2.0 * x[1];
      dx[1] = -2.0 * x[0] - 0.1 * x[1];
    };
  };
  s.ground_truth = []() -> GroundTruth {
    return {{{"x", -0.1}, {"y", 2.0}}, {{"x", -2.0}, {"y", -0.1}}};
  };
  return s;
}

BenchmarkSpec make_cubic2d() {
  BenchmarkSpec s;
  s.name = "cubic2d";
  s.description = "damped cubic oscillator";
  s.state_dim = 2;
  s.variable_names = {"x", "y"};
  s.initial_conditions = {{2.0, 0.0}};
  s.default_dt = 0.01;
  s.default_t_final = 25.0;
  s.form = FormVariant::plain;
  s.dict_degree = 5;
  s.mode = ThresholdMode::fixed;
  s.lambda = 0.05;
  s.normalize = NormalizeMode::off;
  s.make_rhs = [](std::span<const double>) -> VectorField {
    return [](std::span<const double> x, std::span<double> dx) {
      const double x3 = x[0] * x[0] * x[0];
      const double y3 = x[1] * x[1] * x[1];
      dx[0] = -0.1 * x3 + 2.0 * y3;
      dx[1] = -2.0 * x3 - 0.1 * y3;
    };
  };
  s.ground_truth = []() -> GroundTruth {
    return {{{"x^3", -0.1}, {"y^3", 2.0}}, {{"x^3", -2.0}, {"y^3", -0.1}}};
  };
  return s;
}

BenchmarkSpec make_fhn() {
  BenchmarkSpec s;
  s.name = "fhn";
  s.description = "FitzHugh-Nagumo neuron model";
  s.state_dim = 2;
  s.variable_names = {"v", "w"};
  s.initial_conditions = {{0.0, 0.0}};
  s.default_dt = 0.1;
  s.default_t_final = 600.0;
  s.form = FormVariant::plain;
  s.dict_degree = 3;
  s.mode = ThresholdMode::fixed;
  s.lambda = 0.01;
  s.normalize = NormalizeMode::off;
  s.make_rhs = [](std::span<const double>) -> VectorField {
    return [](std::span<const double> x, std::span<double> dx) {
      dx[0] = x[0] - x[0] * x[0] * x[0] / 3.0 - x[1] + 0.5;
      dx[1] = 0.040 * x[0] - 0.028 * x[1] + 0.032;
    };
  };
  s.ground_truth = []() -> GroundTruth {
    return {{{"1", 0.5}, {"v", 1.0}, {"w", -1.0}, {"v^3", -1.0 / 3.0}},
            {{"1", 0.032}, {"v", 0.040}, {"w", -0.028}}};
  };
  return s;
}

BenchmarkSpec make_lorenz() {
  BenchmarkSpec s;
  s.name = "lorenz";
  s.description = "Lorenz system, trained in shifted-scaled coordinates";
  s.state_dim = 3;
  s.variable_names = {"x", "y", "z"};
  s.initial_conditions = {{-8.0, 7.0, 27.0}};
  s.default_dt = 0.01;
  s.default_t_final = 20.0;
  s.form = FormVariant::plain;
  s.dict_degree = 2;
  s.mode = ThresholdMode::fixed;
  s.lambda = 0.5;
  s.normalize = NormalizeMode::custom;
  NormalizationRecord record;
  record.shift = {0.0, 0.0, 25.0};
  record.scale = {8.0, 8.0, 8.0};
  record.custom = true;
  s.custom_normalization = record;
  s.make_rhs = [](std::span<const double>) -> VectorField {
    return [](std::span<const double> x, std::span<double> dx) {
      dx[0] = 10.0 * (x[1] - x[0]);
      dx[1] = x[0] * (28.0 - x[2]) - x[1];
      dx[2] = x[0] * x[1] - 8.0 / 3.0 * x[2];
    };
  };
  // Stated in the training coordinates x/8, y/8, (z - 25)/8.
  s.ground_truth = []() -> GroundTruth {
    return {{{"x", -10.0}, {"y", 10.0}},
            {{"x", 3.0}, {"y", -1.0}, {"x z", -8.0}},
            {{"1", -25.0 / 3.0}, {"z", -8.0 / 3.0}, {"x y", 8.0}}};
  };
  return s;
}

BenchmarkSpec make_mm() {
  BenchmarkSpec s;
  s.name = "mm";
  s.description = "Michaelis-Menten substrate kinetics (rational model)";
  s.state_dim = 1;
  s.variable_names = {"s"};
  s.initial_conditions = {{0.5}, {1.0}, {1.5}, {2.0}};
  s.default_dt = 0.05;
  s.default_t_final = 8.0;
  s.form = FormVariant::rational;
  s.dict_degree = 4;
  s.denominator_degree = 4;
  s.mode = ThresholdMode::iterative;
  s.tol = 1e-8;
  s.normalize = NormalizeMode::statistical;
  // Rational valleys want many small steps: slower decay, longer windows.
  s.optimizer.max_iters = 20000;
  s.optimizer.window = 100;
  s.optimizer.stall_tol = 1e-8;
  s.optimizer.decay = 0.5;
  s.make_rhs = [](std::span<const double>) -> VectorField {
    return [](std::span<const double> x, std::span<double> dx) {
      dx[0] = 0.6 - 1.5 * x[0] / (0.3 + x[0]);
    };
  };
  s.ground_truth = []() -> GroundTruth { return {}; };
  return s;
}

BenchmarkSpec make_hopf() {
  BenchmarkSpec s;
  s.name = "hopf";
  s.description = "Hopf normal form over a swept bifurcation parameter";
  s.state_dim = 2;
  s.variable_names = {"x", "y"};
  s.param_names = {"mu"};
  s.trajectory_params = {{-0.20}, {-0.15}, {-0.10}, {-0.05},
                         {0.15},  {0.40},  {0.80},  {1.20}};
  s.initial_conditions.assign(s.trajectory_params.size(), {2.0, 0.0});
  s.default_dt = 0.2;
  s.default_t_final = 75.0;
  s.default_noise = 1.5e-3;
  s.form = FormVariant::plain;
  s.dict_degree = 3;
  s.mode = ThresholdMode::fixed;
  s.lambda = 0.1;
  s.normalize = NormalizeMode::off;
  s.make_rhs = [](std::span<const double> params) -> VectorField {
    const double mu = params[0];
    return [mu](std::span<const double> x, std::span<double> dx) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      dx[0] = mu * x[0] - x[1] - x[0] * r2;
      dx[1] = x[0] + mu * x[1] - x[1] * r2;
    };
  };
  s.ground_truth = []() -> GroundTruth {
    return {{{"x mu", 1.0}, {"y", -1.0}, {"x^3", -1.0}, {"x y^2", -1.0}},
            {{"x", 1.0}, {"y mu", 1.0}, {"x^2 y", -1.0}, {"y^3", -1.0}}};
  };
  return s;
}

const std::vector<BenchmarkSpec>& registry() {
  static const std::vector<BenchmarkSpec> presets = [] {
    std::vector<BenchmarkSpec> list;
    list.push_back(make_linear2d());
    list.push_back(make_cubic2d());
    list.push_back(make_fhn());
    list.push_back(make_lorenz());
    list.push_back(make_mm());
    list.push_back(make_hopf());
    return list;
  }();
  return presets;
}

}  // namespace

std::vector<std::string> benchmark_names() {
  std::vector<std::string> names;
  names.reserve(registry().size());
  for (const auto& spec : registry()) names.push_back(spec.name);
  return names;
}

const BenchmarkSpec& get_benchmark(const std::string& name) {
  for (const auto& spec : registry())
    if (spec.name == name) return spec;
  throw std::invalid_argument("unknown benchmark \"" + name + "\"");
}

TrajectorySet simulate_benchmark(const BenchmarkSpec& spec, double dt, double t_final,
                                 double noise_sigma, std::uint64_t seed, int substeps) {
  if (!spec.trajectory_params.empty() &&
      spec.trajectory_params.size() != spec.initial_conditions.size())
    throw std::invalid_argument("trajectory_params must match initial_conditions");

  const auto times = uniform_times(dt, t_final);
  TrajectorySet set;
  for (std::size_t i = 0; i < spec.initial_conditions.size(); ++i) {
    std::vector<double> params;
    if (!spec.trajectory_params.empty()) params = spec.trajectory_params[i];
    const VectorField rhs = spec.make_rhs(params);
    Trajectory traj = simulate_reference(rhs, spec.initial_conditions[i], times, substeps);
    traj.params = std::move(params);
    set.items.push_back(std::move(traj));
  }
  if (noise_sigma > 0.0) set = add_gaussian_noise(set, noise_sigma, seed);
  return set;
}

Dictionary benchmark_dictionary(const BenchmarkSpec& spec) {
  const std::size_t num_vars = spec.state_dim + spec.param_names.size();
  Dictionary dict = build_polynomial_dictionary(num_vars, spec.dict_degree, spec.dict_constant);
  dict.variable_names = spec.variable_names;
  for (const auto& name : spec.param_names) dict.variable_names.push_back(name);
  return dict;
}

ModelForm benchmark_form(const BenchmarkSpec& spec) {
  const std::size_t num_vars = spec.state_dim + spec.param_names.size();
  auto named = [&](Dictionary dict) {
    dict.variable_names = spec.variable_names;
    for (const auto& name : spec.param_names) dict.variable_names.push_back(name);
    return dict;
  };
  switch (spec.form) {
    case FormVariant::plain:
      return make_plain_form(benchmark_dictionary(spec), spec.state_dim);
    case FormVariant::rational:
      return make_rational_form(
          benchmark_dictionary(spec),
          named(build_polynomial_dictionary(num_vars, spec.denominator_degree, false)),
          spec.state_dim);
    case FormVariant::extended:
      return make_extended_form(
          benchmark_dictionary(spec), benchmark_dictionary(spec),
          named(build_polynomial_dictionary(num_vars, spec.denominator_degree, false)),
          spec.state_dim);
  }
  throw std::invalid_argument("unknown form variant");
}

}  // namespace rksindy
