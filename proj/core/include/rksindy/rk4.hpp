#pragma once

#include <concepts>
#include <span>
#include <vector>

#include "rksindy/matrix.hpp"
#include "rksindy/model.hpp"
#include "rksindy/trajectory.hpp"

namespace rksindy {

/// Stage combination of the one-step map. `classical` is the standard
/// (h/6)(k1 + 2 k2 + 2 k3 + k4); `uniform` weighs all four stages equally
/// with (h/6)(k1 + k2 + k3 + k4) and exists for comparison runs only.
enum class Rk4Weights { classical, uniform };

template <typename F>
concept StateField = requires(F f, std::span<const double> x, std::span<double> dx) {
  { f(x, dx) };
};

/// One fourth-order step of size h (h may be negative). `f` maps the state
/// to its derivative; out must not alias x.
template <StateField F>
void rk4_step(F&& f, std::span<const double> x, double h, std::span<double> out,
              Rk4Weights weights = Rk4Weights::classical) {
  const std::size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), y(n);
  f(std::span<const double>(x), std::span<double>(k1));
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
  f(std::span<const double>(y), std::span<double>(k2));
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
  f(std::span<const double>(y), std::span<double>(k3));
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
  f(std::span<const double>(y), std::span<double>(k4));
  const bool uniform = weights == Rk4Weights::uniform;
  const double w2 = uniform ? 1.0 : 2.0;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] + h / 6.0 * (k1[i] + w2 * k2[i] + w2 * k3[i] + k4[i]);
}

template <StateField F>
std::vector<double> rk4_step(F&& f, std::span<const double> x, double h,
                             Rk4Weights weights = Rk4Weights::classical) {
  std::vector<double> out(x.size());
  rk4_step(f, x, h, std::span<double>(out), weights);
  return out;
}

enum class PairDirection { forward, backward };

/// Aligned one-step prediction problems: row r asks the model to step from
/// sources[r] by steps[r] and land on targets[r]. Inputs are taken at the
/// source sample (zero-order hold); params repeat the trajectory constants
/// so pairs from several trajectories can be concatenated.
struct PredictionPair {
  PairDirection direction = PairDirection::forward;
  Matrix sources;
  Matrix targets;
  std::vector<double> steps;
  Matrix inputs;  // rows x m, empty when no inputs
  Matrix params;  // rows x p, empty when no params

  [[nodiscard]] std::size_t rows() const { return steps.size(); }
  [[nodiscard]] std::size_t state_dim() const { return sources.cols(); }
};

/// Builds the N forward pairs (x(t_k) -> x(t_{k+1}), step h_k) or the N
/// backward pairs (x(t_{k+1}) -> x(t_k), step -h_k) of one trajectory.
/// Throws InsufficientDataError for trajectories with fewer than 2 samples.
PredictionPair build_pairs(const Trajectory& traj, PairDirection direction);

/// Concatenation over a trajectory set; pairs never straddle a boundary.
PredictionPair build_pairs(const TrajectorySet& data, PairDirection direction);

/// Augmented field for prediction: maps v = [x, u, p] to dx/dt of the state
/// block. Used to drive predictions with a known right-hand side in tests.
template <typename F>
concept AugmentedField = requires(F f, std::span<const double> v, std::span<double> dx) {
  { f(v, dx) };
};

namespace detail {

template <typename FieldEval>
void predict_rows(const PredictionPair& pair, Rk4Weights weights, FieldEval&& eval,
                  Matrix& out) {
  const std::size_t n = pair.state_dim();
  const std::size_t m = pair.inputs.cols();
  const std::size_t p = pair.params.cols();
  std::vector<double> v(n + m + p), k1(n), k2(n), k3(n), k4(n);
  const bool uniform = weights == Rk4Weights::uniform;
  const double w2 = uniform ? 1.0 : 2.0;
  for (std::size_t r = 0; r < pair.rows(); ++r) {
    const double h = pair.steps[r];
    auto x = pair.sources.row(r);
    for (std::size_t j = 0; j < m; ++j) v[n + j] = pair.inputs(r, j);
    for (std::size_t j = 0; j < p; ++j) v[n + m + j] = pair.params(r, j);

    for (std::size_t i = 0; i < n; ++i) v[i] = x[i];
    eval(std::span<const double>(v), std::span<double>(k1));
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] + 0.5 * h * k1[i];
    eval(std::span<const double>(v), std::span<double>(k2));
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] + 0.5 * h * k2[i];
    eval(std::span<const double>(v), std::span<double>(k3));
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] + h * k3[i];
    eval(std::span<const double>(v), std::span<double>(k4));
    for (std::size_t i = 0; i < n; ++i)
      out(r, i) = x[i] + h / 6.0 * (k1[i] + w2 * k2[i] + w2 * k3[i] + k4[i]);
  }
}

}  // namespace detail

/// One-step predictions for every row of `pair` with an explicit field over
/// the augmented variables.
template <AugmentedField F>
Matrix predict(const PredictionPair& pair, F&& field,
               Rk4Weights weights = Rk4Weights::classical) {
  Matrix out(pair.rows(), pair.state_dim());
  detail::predict_rows(pair, weights, field, out);
  return out;
}

/// Same, driven by a trainable model. Rows where evaluation fails (overflow
/// or denominator floor) are filled with NaN; the loss assigns them the
/// penalty instead.
Matrix predict(const PredictionPair& pair, const ModelForm& form,
               double denominator_floor = 1e-3, Rk4Weights weights = Rk4Weights::classical);

}  // namespace rksindy
