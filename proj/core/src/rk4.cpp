#include "rksindy/rk4.hpp"

#include <cmath>
#include <limits>

#include "field_eval.hpp"
#include "rksindy/errors.hpp"

namespace rksindy {

PredictionPair build_pairs(const Trajectory& traj, PairDirection direction) {
  traj.validate();
  const std::size_t samples = traj.num_samples();
  if (samples < 2)
    throw InsufficientDataError("at least two samples are needed to form prediction pairs");

  const std::size_t rows = samples - 1;
  const std::size_t n = traj.state_dim();
  const std::size_t m = traj.input_dim();
  const std::size_t p = traj.param_dim();

  PredictionPair pair;
  pair.direction = direction;
  pair.sources = Matrix(rows, n);
  pair.targets = Matrix(rows, n);
  pair.steps.resize(rows);
  if (m > 0) pair.inputs = Matrix(rows, m);
  if (p > 0) pair.params = Matrix(rows, p);

  const bool forward = direction == PairDirection::forward;
  for (std::size_t k = 0; k < rows; ++k) {
    const std::size_t src = forward ? k : k + 1;
    const std::size_t dst = forward ? k + 1 : k;
    const double h = traj.times[k + 1] - traj.times[k];
    pair.steps[k] = forward ? h : -h;
    for (std::size_t i = 0; i < n; ++i) {
      pair.sources(k, i) = traj.states(src, i);
      pair.targets(k, i) = traj.states(dst, i);
    }
    for (std::size_t j = 0; j < m; ++j) pair.inputs(k, j) = traj.inputs(src, j);
    for (std::size_t j = 0; j < p; ++j) pair.params(k, j) = traj.params[j];
  }
  return pair;
}

PredictionPair build_pairs(const TrajectorySet& data, PairDirection direction) {
  data.validate();
  std::size_t rows = 0;
  for (const auto& traj : data.items) {
    if (traj.num_samples() < 2)
      throw InsufficientDataError("at least two samples are needed to form prediction pairs");
    rows += traj.num_samples() - 1;
  }

  const std::size_t n = data.state_dim();
  const std::size_t m = data.input_dim();
  const std::size_t p = data.param_dim();

  PredictionPair pair;
  pair.direction = direction;
  pair.sources = Matrix(rows, n);
  pair.targets = Matrix(rows, n);
  pair.steps.resize(rows);
  if (m > 0) pair.inputs = Matrix(rows, m);
  if (p > 0) pair.params = Matrix(rows, p);

  std::size_t at = 0;
  for (const auto& traj : data.items) {
    PredictionPair one = build_pairs(traj, direction);
    for (std::size_t k = 0; k < one.rows(); ++k, ++at) {
      pair.steps[at] = one.steps[k];
      for (std::size_t i = 0; i < n; ++i) {
        pair.sources(at, i) = one.sources(k, i);
        pair.targets(at, i) = one.targets(k, i);
      }
      for (std::size_t j = 0; j < m; ++j) pair.inputs(at, j) = one.inputs(k, j);
      for (std::size_t j = 0; j < p; ++j) pair.params(at, j) = one.params(k, j);
    }
  }
  return pair;
}

Matrix predict(const PredictionPair& pair, const ModelForm& form, double denominator_floor,
               Rk4Weights weights) {
  if (pair.state_dim() != form.state_dim)
    throw DimensionError("pair state dimension does not match the model");
  const std::size_t n = form.state_dim;
  const std::size_t aug = n + pair.inputs.cols() + pair.params.cols();

  Matrix out(pair.rows(), n);
  detail::StageRecord rec;
  rec.resize(form, aug);

  std::vector<double> v(aug), k1(n), k2(n), k3(n), k4(n);
  const double w2 = weights == Rk4Weights::uniform ? 1.0 : 2.0;

  for (std::size_t r = 0; r < pair.rows(); ++r) {
    const double h = pair.steps[r];
    auto x = pair.sources.row(r);
    for (std::size_t j = 0; j < pair.inputs.cols(); ++j) v[n + j] = pair.inputs(r, j);
    for (std::size_t j = 0; j < pair.params.cols(); ++j)
      v[n + pair.inputs.cols() + j] = pair.params(r, j);

    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i];
    ok = ok && detail::eval_stage_values(form, v, denominator_floor, rec);
    k1 = rec.f;
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] + 0.5 * h * k1[i];
    ok = ok && detail::eval_stage_values(form, v, denominator_floor, rec);
    k2 = rec.f;
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] + 0.5 * h * k2[i];
    ok = ok && detail::eval_stage_values(form, v, denominator_floor, rec);
    k3 = rec.f;
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] + h * k3[i];
    ok = ok && detail::eval_stage_values(form, v, denominator_floor, rec);
    k4 = rec.f;

    for (std::size_t i = 0; i < n; ++i) {
      const double value = x[i] + h / 6.0 * (k1[i] + w2 * k2[i] + w2 * k3[i] + k4[i]);
      out(r, i) = ok && std::isfinite(value) ? value : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

}  // namespace rksindy
