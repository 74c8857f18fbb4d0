#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rksindy/matrix.hpp"

namespace rksindy {

/// Right-hand side of an autonomous ODE: writes f(x) into `dx`.
using VectorField = std::function<void(std::span<const double> x, std::span<double> dx)>;

/// Controlled right-hand side f(x, u).
using ControlledField =
    std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> dx)>;

/// One sampled trajectory. Times are strictly increasing and may be
/// irregular. `inputs` has one row per sample (empty when the system is
/// autonomous); `params` are constant over the trajectory.
struct Trajectory {
  std::vector<double> times;
  Matrix states;  // times.size() x state_dim
  Matrix inputs;  // times.size() x input_dim, or empty
  std::vector<double> params;

  [[nodiscard]] std::size_t num_samples() const { return times.size(); }
  [[nodiscard]] std::size_t state_dim() const { return states.cols(); }
  [[nodiscard]] std::size_t input_dim() const { return inputs.cols(); }
  [[nodiscard]] std::size_t param_dim() const { return params.size(); }

  /// Throws DimensionError / std::invalid_argument when the invariants
  /// (monotone finite times, matching row counts, finite values) fail.
  void validate() const;
};

/// A collection of trajectories of one system (same dimensions, possibly
/// different parameter values and lengths).
struct TrajectorySet {
  std::vector<Trajectory> items;

  [[nodiscard]] std::size_t size() const { return items.size(); }
  [[nodiscard]] bool empty() const { return items.empty(); }
  [[nodiscard]] std::size_t state_dim() const { return items.empty() ? 0 : items[0].state_dim(); }
  [[nodiscard]] std::size_t input_dim() const { return items.empty() ? 0 : items[0].input_dim(); }
  [[nodiscard]] std::size_t param_dim() const { return items.empty() ? 0 : items[0].param_dim(); }

  void validate() const;
};

/// Integrates `rhs` through the sample times with `substeps` fixed
/// fourth-order steps per interval. substeps=1 makes the sampled data an
/// exact fixed point of the one-step prediction map; substeps around 100
/// gives reference data accurate to the continuous flow.
/// Throws DivergenceError naming the first non-finite sample.
Trajectory simulate_reference(const VectorField& rhs, std::span<const double> x0,
                              std::span<const double> times, int substeps = 100);

/// Same, with an input signal held constant over each sample interval
/// (zero-order hold), which is also how prediction treats inputs.
Trajectory simulate_controlled(const ControlledField& rhs, std::span<const double> x0,
                               std::span<const double> times, const Matrix& inputs,
                               int substeps = 100);

/// CSV layout: header `t,x1,...,xn[,u1,...,um][,p1,...,pp]`, one row per
/// sample. Parameter columns must be constant down the file and are lifted
/// into Trajectory::params. Values round-trip exactly.
Trajectory load_csv(const std::filesystem::path& path);
void save_csv(const Trajectory& traj, const std::filesystem::path& path,
              const std::string& comment = "");

}  // namespace rksindy
