#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rksindy/model.hpp"
#include "rksindy/trajectory.hpp"

namespace rksindy {

/// Affine per-variable map used for normalization: x_tilde = (x - shift) / scale.
struct NormalizationRecord {
  std::vector<double> shift;
  std::vector<double> scale;
  bool custom = false;

  [[nodiscard]] bool identity() const;
  /// Record of the inverse map x = scale * x_tilde + shift.
  [[nodiscard]] NormalizationRecord inverse() const;

  friend bool operator==(const NormalizationRecord&, const NormalizationRecord&) = default;
};

/// Adds iid Gaussian noise to every state entry. Deterministic per seed;
/// times, inputs and params are untouched. sigma = 0 returns the input.
Trajectory add_gaussian_noise(const Trajectory& traj, double sigma, std::uint64_t seed);
TrajectorySet add_gaussian_noise(const TrajectorySet& data, double sigma, std::uint64_t seed);

/// Least-squares convolution weights for a Savitzky-Golay window: the fit of
/// a degree-`polyorder` polynomial over offsets -half..half, evaluated at
/// `eval_offset` after `deriv` differentiations. Exposed for the derivative
/// estimator and for tests.
std::vector<double> savgol_weights(int window, int polyorder, int deriv = 0,
                                   int eval_offset = 0);

/// Smooths a uniformly sampled signal. Interior points use the centered
/// window; the first and last half-windows come from evaluating the terminal
/// window fits at the boundary offsets. window must be odd, >= 3 and
/// > polyorder.
std::vector<double> savgol_filter(std::span<const double> signal, int window, int polyorder);

/// Same fit, evaluated as a first derivative and scaled by the sample step.
std::vector<double> savgol_derivative(std::span<const double> signal, int window, int polyorder,
                                      double dt);

/// Filters every state column of the trajectory.
Trajectory savgol_filter(const Trajectory& traj, int window, int polyorder);
TrajectorySet savgol_filter(const TrajectorySet& data, int window, int polyorder);

/// Standardizes states to zero mean and unit deviation per variable
/// (statistics pooled over the set). Zero-variance variables keep scale 1
/// and are reported through `warnings` when provided.
std::pair<Trajectory, NormalizationRecord> normalize(const Trajectory& traj,
                                                     std::vector<std::string>* warnings = nullptr);
std::pair<TrajectorySet, NormalizationRecord> normalize(const TrajectorySet& data,
                                                        std::vector<std::string>* warnings = nullptr);

/// Applies an existing record to data (states only).
Trajectory apply_normalization(const Trajectory& traj, const NormalizationRecord& record);
TrajectorySet apply_normalization(const TrajectorySet& data, const NormalizationRecord& record);

/// Rewrites a model discovered in normalized coordinates as a model of the
/// original variables: substitutes x_tilde = (x - shift)/scale into every
/// polynomial feature, re-expands, and scales each equation by its variable's
/// scale. Rational forms substitute numerator and denominator separately and
/// are rescaled so the denominator constant stays 1. Trig/exp features only
/// survive pure scalings (shift 0); otherwise this throws.
ModelForm denormalize_model(const ModelForm& form, const NormalizationRecord& record);

}  // namespace rksindy
