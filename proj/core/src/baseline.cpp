#include "rksindy/baseline.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "rksindy/errors.hpp"
#include "rksindy/preprocess.hpp"

namespace rksindy {

namespace {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool uniform_grid(std::span<const double> times) {
  if (times.size() < 2) return true;
  const double h = times[1] - times[0];
  for (std::size_t k = 1; k + 1 < times.size(); ++k)
    if (std::abs((times[k + 1] - times[k]) - h) > 1e-9 * std::abs(h)) return false;
  return true;
}

}  // namespace

DerivativeEstimate estimate_derivatives(const Trajectory& traj, DerivativeMethod method,
                                        int window, int polyorder) {
  traj.validate();
  const std::size_t num = traj.num_samples();
  const std::size_t n = traj.state_dim();

  DerivativeEstimate est;
  est.method = method;

  if (method == DerivativeMethod::central_difference) {
    if (num < 3)
      throw InsufficientDataError("central differences need at least 3 samples");
    est.sample_indices.resize(num - 2);
    est.values = Matrix(num - 2, n);
    for (std::size_t k = 1; k + 1 < num; ++k) {
      est.sample_indices[k - 1] = k;
      const double span = traj.times[k + 1] - traj.times[k - 1];
      for (std::size_t i = 0; i < n; ++i)
        est.values(k - 1, i) = (traj.states(k + 1, i) - traj.states(k - 1, i)) / span;
    }
    return est;
  }

  if (!uniform_grid(traj.times))
    throw std::invalid_argument("Savitzky-Golay derivatives require a uniform grid");
  if (num < static_cast<std::size_t>(window))
    throw InsufficientDataError("trajectory is shorter than the filter window");
  const double dt = traj.times[1] - traj.times[0];

  est.sample_indices.resize(num);
  est.values = Matrix(num, n);
  std::vector<double> column(num);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < num; ++k) column[k] = traj.states(k, i);
    const auto deriv = savgol_derivative(column, window, polyorder, dt);
    for (std::size_t k = 0; k < num; ++k) est.values(k, i) = deriv[k];
  }
  for (std::size_t k = 0; k < num; ++k) est.sample_indices[k] = k;
  return est;
}

CoefficientMatrix stlsq(const Matrix& features, const Matrix& targets, double lambda,
                        int max_rounds, std::vector<std::string>* warnings) {
  const std::size_t m = features.rows();
  const std::size_t d = features.cols();
  const std::size_t n = targets.cols();
  if (targets.rows() != m)
    throw DimensionError("feature and target row counts differ");
  if (m == 0) throw InsufficientDataError("no rows to regress on");
  if (lambda < 0.0) throw std::invalid_argument("cutoff must be non-negative");

  Eigen::Map<const EigenRowMajor> feat(features.data(), static_cast<Eigen::Index>(m),
                                       static_cast<Eigen::Index>(d));
  Eigen::Map<const EigenRowMajor> targ(targets.data(), static_cast<Eigen::Index>(m),
                                       static_cast<Eigen::Index>(n));

  CoefficientMatrix out(d, n);
  bool ridge_used = false;

  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> active(d);
    for (std::size_t j = 0; j < d; ++j) active[j] = j;

    for (int round = 0; round < max_rounds && !active.empty(); ++round) {
      Eigen::MatrixXd sub(m, active.size());
      for (std::size_t c = 0; c < active.size(); ++c) sub.col(c) = feat.col(active[c]);

      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
      Eigen::VectorXd coef;
      if (qr.rank() < static_cast<Eigen::Index>(active.size())) {
        ridge_used = true;
        Eigen::MatrixXd gram = sub.transpose() * sub;
        gram.diagonal().array() += 1e-10;
        coef = gram.ldlt().solve(sub.transpose() * targ.col(k));
      } else {
        coef = qr.solve(targ.col(k));
      }

      std::vector<std::size_t> survivors;
      for (std::size_t c = 0; c < active.size(); ++c) {
        if (std::abs(coef(c)) < lambda) {
          out.deactivate(active[c], k);
        } else {
          out.values(active[c], k) = coef(c);
          survivors.push_back(active[c]);
        }
      }
      const bool stable = survivors.size() == active.size();
      active = std::move(survivors);
      if (stable) break;
    }
    if (active.empty())
      for (std::size_t j = 0; j < d; ++j)
        if (out.active(j, k)) out.deactivate(j, k);
  }

  if (ridge_used && warnings)
    warnings->push_back("rank-deficient least squares; applied ridge 1e-10");
  return out;
}

DiscoveredModel baseline_discover(const TrajectorySet& data, const Dictionary& dict,
                                  double lambda, DerivativeMethod method, int window,
                                  int polyorder) {
  data.validate();
  dict.validate();
  const std::size_t n = data.state_dim();
  const std::size_t m = data.input_dim();
  const std::size_t p = data.param_dim();
  if (dict.num_vars != n + m + p)
    throw DimensionError("dictionary variable count does not match the data");

  std::size_t total_rows = 0;
  std::vector<DerivativeEstimate> estimates;
  estimates.reserve(data.size());
  for (const auto& traj : data.items) {
    estimates.push_back(estimate_derivatives(traj, method, window, polyorder));
    total_rows += estimates.back().sample_indices.size();
  }

  Matrix features(total_rows, dict.size());
  Matrix targets(total_rows, n);
  std::vector<double> v(dict.num_vars);
  std::size_t row = 0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    const auto& traj = data.items[t];
    const auto& est = estimates[t];
    for (std::size_t r = 0; r < est.sample_indices.size(); ++r, ++row) {
      const std::size_t k = est.sample_indices[r];
      for (std::size_t i = 0; i < n; ++i) v[i] = traj.states(k, i);
      for (std::size_t j = 0; j < m; ++j) v[n + j] = traj.inputs(k, j);
      for (std::size_t j = 0; j < p; ++j) v[n + m + j] = traj.params[j];
      evaluate(dict, v, features.row(row));
      for (std::size_t i = 0; i < n; ++i) targets(row, i) = est.values(r, i);
    }
  }

  DiscoveredModel model;
  model.method = "std-sindy";
  model.form = make_plain_form(dict, n);
  model.form.linear.coeffs = stlsq(features, targets, lambda, 25, &model.warnings);
  return model;
}

}  // namespace rksindy
