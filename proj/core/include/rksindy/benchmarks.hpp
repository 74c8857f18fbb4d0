#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rksindy/model.hpp"
#include "rksindy/preprocess.hpp"
#include "rksindy/regression.hpp"
#include "rksindy/trajectory.hpp"

namespace rksindy {

enum class ThresholdMode { fixed, iterative };
enum class NormalizeMode { off, automatic, statistical, custom };

/// A self-contained study preset: the reference dynamics plus the dictionary
/// and discovery settings the system is meant to be solved with.
struct BenchmarkSpec {
  std::string name;
  std::string description;
  std::size_t state_dim = 0;
  std::vector<std::string> variable_names;

  /// One trajectory per initial condition; `trajectory_params` (when
  /// non-empty, one entry per trajectory) supplies the parameter vector
  /// recorded in the data and appended to the dictionary variables.
  std::vector<std::vector<double>> initial_conditions;
  std::vector<std::vector<double>> trajectory_params;
  std::vector<std::string> param_names;

  double default_dt = 1e-2;
  double default_t_final = 25.0;
  double default_noise = 0.0;

  FormVariant form = FormVariant::plain;
  int dict_degree = 5;
  int denominator_degree = 0;  // rational/extended only
  bool dict_constant = true;

  ThresholdMode mode = ThresholdMode::fixed;
  double lambda = 5e-2;
  double tol = 0.0;  // iterative mode; <= 0 means the 10x-dense default
  bool use_backward = true;
  NormalizeMode normalize = NormalizeMode::automatic;
  std::optional<NormalizationRecord> custom_normalization;

  /// Solver budget the preset was tuned with (rational fits need a longer,
  /// gentler schedule than the defaults).
  OptimizerConfig optimizer;

  /// Builds the right-hand side for one trajectory's parameter vector.
  std::function<VectorField(std::span<const double> params)> make_rhs;

  /// Ground-truth coefficient support and values on this preset's dictionary
  /// layout, used by tests and the compare command (plain forms only).
  std::function<std::vector<std::vector<std::pair<std::string, double>>>()> ground_truth;
};

[[nodiscard]] std::vector<std::string> benchmark_names();
[[nodiscard]] const BenchmarkSpec& get_benchmark(const std::string& name);

/// Simulates every preset trajectory on a uniform grid with the reference
/// integrator and optionally adds measurement noise. Noise uses one seed
/// stream across trajectories, so the set is deterministic as a whole.
TrajectorySet simulate_benchmark(const BenchmarkSpec& spec, double dt, double t_final,
                                 double noise_sigma, std::uint64_t seed, int substeps = 100);

/// The preset's dictionary over states plus declared parameters.
Dictionary benchmark_dictionary(const BenchmarkSpec& spec);

/// The preset's model form (plain or rational) with all coefficients active.
ModelForm benchmark_form(const BenchmarkSpec& spec);

}  // namespace rksindy
