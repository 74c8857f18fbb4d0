#include "rksindy/preprocess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "rksindy/errors.hpp"

namespace rksindy {

bool NormalizationRecord::identity() const {
  if (shift.empty() && scale.empty()) return true;
  for (double s : shift)
    if (s != 0.0) return false;
  for (double s : scale)
    if (s != 1.0) return false;
  return true;
}

NormalizationRecord NormalizationRecord::inverse() const {
  // x = scale * y + shift  rewritten as  y' = (x - shift') / scale' with
  // shift' = -shift/scale and scale' = 1/scale.
  NormalizationRecord inv;
  inv.custom = custom;
  inv.shift.resize(shift.size());
  inv.scale.resize(scale.size());
  for (std::size_t i = 0; i < scale.size(); ++i) {
    inv.scale[i] = 1.0 / scale[i];
    inv.shift[i] = -shift[i] / scale[i];
  }
  return inv;
}

// ───────────────────────── noise ─────────────────────────

namespace {

// Box-Muller on top of the fully specified mt19937_64 stream, so a seed
// reproduces the same draws on every platform. std::normal_distribution has
// an implementation-defined algorithm and would not.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;          // [0,1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void add_noise_inplace(Trajectory& traj, double sigma, std::mt19937_64& rng) {
  for (std::size_t k = 0; k < traj.states.rows(); ++k)
    for (std::size_t i = 0; i < traj.states.cols(); ++i)
      traj.states(k, i) += sigma * standard_normal(rng);
}

}  // namespace

Trajectory add_gaussian_noise(const Trajectory& traj, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("noise level must be non-negative");
  Trajectory out = traj;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  add_noise_inplace(out, sigma, rng);
  return out;
}

TrajectorySet add_gaussian_noise(const TrajectorySet& data, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("noise level must be non-negative");
  TrajectorySet out = data;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  for (auto& traj : out.items) add_noise_inplace(traj, sigma, rng);
  return out;
}

// ───────────────────────── Savitzky-Golay ─────────────────────────

std::vector<double> savgol_weights(int window, int polyorder, int deriv, int eval_offset) {
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument("window must be odd and at least 3");
  if (polyorder < 0 || polyorder >= window)
    throw std::invalid_argument("polyorder must be smaller than the window");
  if (deriv < 0 || deriv > polyorder)
    throw std::invalid_argument("derivative order exceeds the polynomial order");

  const int half = window / 2;
  Eigen::MatrixXd vander(window, polyorder + 1);
  for (int r = 0; r < window; ++r) {
    double t = 1.0;
    for (int c = 0; c <= polyorder; ++c) {
      vander(r, c) = t;
      t *= static_cast<double>(r - half);
    }
  }

  // Weight vector = A (A^T A)^{-1} e, where e picks the deriv-th derivative
  // of the fitted polynomial at eval_offset.
  Eigen::VectorXd e = Eigen::VectorXd::Zero(polyorder + 1);
  for (int c = deriv; c <= polyorder; ++c) {
    double factor = 1.0;
    for (int d = 0; d < deriv; ++d) factor *= static_cast<double>(c - d);
    e(c) = factor * std::pow(static_cast<double>(eval_offset), c - deriv);
  }
  const Eigen::VectorXd z = (vander.transpose() * vander).ldlt().solve(e);
  const Eigen::VectorXd w = vander * z;
  return {w.data(), w.data() + w.size()};
}

namespace {

std::vector<double> savgol_apply(std::span<const double> signal, int window, int polyorder,
                                 int deriv) {
  const std::size_t n = signal.size();
  if (n < static_cast<std::size_t>(window))
    throw InsufficientDataError("signal is shorter than the filter window");
  const int half = window / 2;

  std::vector<double> out(n);
  const auto center = savgol_weights(window, polyorder, deriv, 0);

  for (std::size_t r = half; r + half < n; ++r) {
    double acc = 0.0;
    for (int j = 0; j < window; ++j) acc += center[j] * signal[r - half + j];
    out[r] = acc;
  }
  // Boundary samples: evaluate the terminal window fits at their offsets.
  for (int r = 0; r < half; ++r) {
    const auto wh = savgol_weights(window, polyorder, deriv, r - half);
    double head = 0.0;
    for (int j = 0; j < window; ++j) head += wh[j] * signal[j];
    out[r] = head;

    const auto wt = savgol_weights(window, polyorder, deriv, half - r);
    double tail = 0.0;
    for (int j = 0; j < window; ++j) tail += wt[j] * signal[n - window + j];
    out[n - 1 - r] = tail;
  }
  return out;
}

}  // namespace

std::vector<double> savgol_filter(std::span<const double> signal, int window, int polyorder) {
  return savgol_apply(signal, window, polyorder, 0);
}

std::vector<double> savgol_derivative(std::span<const double> signal, int window, int polyorder,
                                      double dt) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  auto out = savgol_apply(signal, window, polyorder, 1);
  for (double& v : out) v /= dt;
  return out;
}

Trajectory savgol_filter(const Trajectory& traj, int window, int polyorder) {
  Trajectory out = traj;
  std::vector<double> column(traj.num_samples());
  for (std::size_t i = 0; i < traj.state_dim(); ++i) {
    for (std::size_t k = 0; k < traj.num_samples(); ++k) column[k] = traj.states(k, i);
    const auto filtered = savgol_filter(column, window, polyorder);
    for (std::size_t k = 0; k < traj.num_samples(); ++k) out.states(k, i) = filtered[k];
  }
  return out;
}

TrajectorySet savgol_filter(const TrajectorySet& data, int window, int polyorder) {
  TrajectorySet out = data;
  for (auto& traj : out.items) traj = savgol_filter(traj, window, polyorder);
  return out;
}

// ───────────────────────── normalization ─────────────────────────

namespace {

NormalizationRecord pooled_statistics(const TrajectorySet& data,
                                      std::vector<std::string>* warnings) {
  const std::size_t n = data.state_dim();
  NormalizationRecord record;
  record.shift.assign(n, 0.0);
  record.scale.assign(n, 1.0);

  std::size_t count = 0;
  for (const auto& traj : data.items) count += traj.num_samples();
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (const auto& traj : data.items)
      for (std::size_t k = 0; k < traj.num_samples(); ++k) mean += traj.states(k, i);
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (const auto& traj : data.items)
      for (std::size_t k = 0; k < traj.num_samples(); ++k) {
        const double d = traj.states(k, i) - mean;
        var += d * d;
      }
    var /= static_cast<double>(count);
    record.shift[i] = mean;
    if (var > 0.0) {
      record.scale[i] = std::sqrt(var);
    } else if (warnings) {
      warnings->push_back("variable " + std::to_string(i + 1) +
                          " has zero variance; scale kept at 1");
    }
  }
  return record;
}

}  // namespace

Trajectory apply_normalization(const Trajectory& traj, const NormalizationRecord& record) {
  if (record.shift.size() != traj.state_dim() || record.scale.size() != traj.state_dim())
    throw DimensionError("normalization record does not match the state dimension");
  Trajectory out = traj;
  for (std::size_t k = 0; k < traj.num_samples(); ++k)
    for (std::size_t i = 0; i < traj.state_dim(); ++i)
      out.states(k, i) = (traj.states(k, i) - record.shift[i]) / record.scale[i];
  return out;
}

TrajectorySet apply_normalization(const TrajectorySet& data, const NormalizationRecord& record) {
  TrajectorySet out = data;
  for (auto& traj : out.items) traj = apply_normalization(traj, record);
  return out;
}

std::pair<Trajectory, NormalizationRecord> normalize(const Trajectory& traj,
                                                     std::vector<std::string>* warnings) {
  TrajectorySet set;
  set.items.push_back(traj);
  const auto record = pooled_statistics(set, warnings);
  return {apply_normalization(traj, record), record};
}

std::pair<TrajectorySet, NormalizationRecord> normalize(const TrajectorySet& data,
                                                        std::vector<std::string>* warnings) {
  data.validate();
  const auto record = pooled_statistics(data, warnings);
  return {apply_normalization(data, record), record};
}

// ───────────────────────── model denormalization ─────────────────────────

namespace {

// Sparse polynomial keyed by exponent multi-index over the augmented
// variables. Only used off the hot path, so a map keeps it simple.
using Poly = std::map<std::vector<int>, double>;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Expansion of ((x - s)/sigma)^e as a polynomial in x.
std::vector<double> affine_power(double s, double sigma, int e) {
  std::vector<double> coeffs(e + 1, 0.0);  // coeffs[t] multiplies x^t
  const double inv = 1.0 / std::pow(sigma, e);
  for (int t = 0; t <= e; ++t)
    coeffs[t] = binomial(e, t) * std::pow(-s, e - t) * inv;
  return coeffs;
}

// Substitutes the affine map into one monomial feature.
Poly expand_monomial(const std::vector<int>& exps, const NormalizationRecord& record,
                     double coefficient) {
  Poly poly;
  poly[std::vector<int>(exps.size(), 0)] = coefficient;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] == 0) continue;
    const double s = i < record.shift.size() ? record.shift[i] : 0.0;
    const double sigma = i < record.scale.size() ? record.scale[i] : 1.0;
    const auto powers = affine_power(s, sigma, exps[i]);
    Poly next;
    for (const auto& [mono, c] : poly)
      for (int t = 0; t <= exps[i]; ++t) {
        if (powers[t] == 0.0) continue;
        auto key = mono;
        key[i] += t;
        next[key] += c * powers[t];
      }
    poly = std::move(next);
  }
  return poly;
}

// Argument variables of a trig/exp feature must not be shifted: the affine
// map must reduce to a pure scaling there.
double argument_scaling(const std::vector<int>& argument, const NormalizationRecord& record) {
  double factor = 1.0;
  for (std::size_t i = 0; i < argument.size(); ++i) {
    if (argument[i] == 0) continue;
    const double s = i < record.shift.size() ? record.shift[i] : 0.0;
    if (s != 0.0)
      throw std::invalid_argument(
          "cannot denormalize a trig/exp feature through a shifted variable");
    const double sigma = i < record.scale.size() ? record.scale[i] : 1.0;
    factor /= std::pow(sigma, argument[i]);
  }
  return factor;
}

struct PartExpansion {
  Dictionary dict;           // adjusted feature set (trig/exp scales rescaled)
  Matrix values;             // new coefficients
  std::vector<double> constant;  // constant surplus per equation (monomial expansion)
};

// Rewrites one part in original coordinates. `equation_scale[k]` multiplies
// equation k (the chain-rule factor), applied by the caller via the
// coefficient matrix it builds here.
PartExpansion expand_part(const ModelPart& part, const NormalizationRecord& record,
                          std::span<const double> equation_scale) {
  const std::size_t d = part.dict.size();
  const std::size_t n = part.coeffs.values.cols();

  PartExpansion out;
  out.dict = part.dict;
  out.values = Matrix(d, n);
  out.constant.assign(n, 0.0);

  std::map<std::vector<int>, std::size_t> monomial_index;
  std::size_t constant_feature = d;  // sentinel: no constant feature present
  for (std::size_t j = 0; j < d; ++j) {
    const auto& f = part.dict.features[j];
    if (f.kind == FeatureKind::monomial) monomial_index[f.exponents] = j;
    if (f.kind == FeatureKind::constant) constant_feature = j;
  }

  for (std::size_t j = 0; j < d; ++j) {
    const auto& f = part.dict.features[j];
    switch (f.kind) {
      case FeatureKind::constant:
        for (std::size_t k = 0; k < n; ++k)
          out.values(j, k) += equation_scale[k] * part.coeffs.values(j, k);
        break;
      case FeatureKind::monomial: {
        for (std::size_t k = 0; k < n; ++k) {
          const double c = part.coeffs.values(j, k);
          if (c == 0.0) continue;
          const Poly poly = expand_monomial(f.exponents, record, equation_scale[k] * c);
          for (const auto& [mono, value] : poly) {
            if (value == 0.0) continue;
            const bool is_constant =
                std::all_of(mono.begin(), mono.end(), [](int e) { return e == 0; });
            if (is_constant) {
              if (constant_feature < d)
                out.values(constant_feature, k) += value;
              else
                out.constant[k] += value;
              continue;
            }
            const auto hit = monomial_index.find(mono);
            if (hit == monomial_index.end())
              throw std::invalid_argument(
                  "dictionary cannot represent the denormalized model");
            out.values(hit->second, k) += value;
          }
        }
        break;
      }
      default: {
        // Pure scaling folds into the feature's inner scale; the feature
        // itself keeps its slot.
        const double factor = argument_scaling(f.argument, record);
        if (f.eta_index)
          out.dict.eta[*f.eta_index] = part.dict.eta[*f.eta_index] * factor;
        else
          out.dict.features[j].scale = f.scale * factor;
        for (std::size_t k = 0; k < n; ++k)
          out.values(j, k) += equation_scale[k] * part.coeffs.values(j, k);
        break;
      }
    }
  }
  return out;
}

CoefficientMatrix to_coefficients(const Matrix& values) {
  CoefficientMatrix coeffs(values.rows(), values.cols());
  coeffs.values = values;
  for (std::size_t j = 0; j < values.rows(); ++j)
    for (std::size_t k = 0; k < values.cols(); ++k)
      if (values(j, k) == 0.0) coeffs.deactivate(j, k);
  return coeffs;
}

}  // namespace

ModelForm denormalize_model(const ModelForm& form, const NormalizationRecord& record) {
  form.validate();
  if (record.identity()) return form;
  const std::size_t n = form.state_dim;
  if (record.shift.size() != n || record.scale.size() != n)
    throw DimensionError("normalization record does not match the state dimension");

  ModelForm out = form;
  const std::vector<double> chain(record.scale.begin(), record.scale.end());
  const std::vector<double> ones(n, 1.0);

  if (form.has_linear()) {
    auto expansion = expand_part(form.linear, record, chain);
    for (double c : expansion.constant)
      if (c != 0.0)
        throw std::invalid_argument("dictionary cannot represent the denormalized model");
    out.linear.dict = expansion.dict;
    out.linear.coeffs = to_coefficients(expansion.values);
  }

  if (form.has_rational()) {
    // dx_k/dt = scale_k num_k(y(x)) / (c0 + den_k(y(x))); numerator carries
    // the chain factor, the denominator substitution is plain.
    auto num_exp = expand_part(form.numerator, record, chain);
    auto den_exp = expand_part(form.denominator, record, ones);
    for (double c : num_exp.constant)
      if (c != 0.0)
        throw std::invalid_argument("dictionary cannot represent the denormalized model");

    // The denominator expansion spills a constant; fold it into the explicit
    // constant and rescale each equation so that constant returns to 1.
    Matrix num_values = num_exp.values;
    Matrix den_values = den_exp.values;
    for (std::size_t k = 0; k < n; ++k) {
      const double c0 = form.denominator_constant + den_exp.constant[k];
      if (c0 == 0.0)
        throw std::invalid_argument("denormalized denominator loses its constant term");
      for (std::size_t j = 0; j < num_values.rows(); ++j) num_values(j, k) /= c0;
      for (std::size_t j = 0; j < den_values.rows(); ++j) den_values(j, k) /= c0;
    }
    out.numerator.dict = num_exp.dict;
    out.numerator.coeffs = to_coefficients(num_values);
    out.denominator.dict = den_exp.dict;
    out.denominator.coeffs = to_coefficients(den_values);
    out.denominator_constant = 1.0;
  }

  return out;
}

}  // namespace rksindy
