#include "rksindy/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "field_eval.hpp"
#include "rksindy/errors.hpp"

namespace rksindy {

// ───────────────────────── parameter layout ─────────────────────────

ParamLayout ParamLayout::build(const ModelForm& form) {
  ParamLayout layout;
  auto add_part = [&](const ModelPart& part, ParamBlock theta_block) {
    const std::size_t d = part.dict.size();
    const std::size_t n = part.coeffs.values.cols();
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (part.coeffs.active(j, k))
          layout.slots.push_back({theta_block, static_cast<std::uint32_t>(j),
                                  static_cast<std::uint32_t>(k)});
  };
  auto add_etas = [&](const ModelPart& part, ParamBlock eta_block) {
    for (std::size_t e = 0; e < part.dict.eta.size(); ++e)
      layout.slots.push_back({eta_block, static_cast<std::uint32_t>(e), 0});
  };
  if (form.has_linear()) add_part(form.linear, ParamBlock::linear_theta);
  if (form.has_rational()) {
    add_part(form.numerator, ParamBlock::numerator_theta);
    add_part(form.denominator, ParamBlock::denominator_theta);
  }
  if (form.has_linear()) add_etas(form.linear, ParamBlock::linear_eta);
  if (form.has_rational()) {
    add_etas(form.numerator, ParamBlock::numerator_eta);
    add_etas(form.denominator, ParamBlock::denominator_eta);
  }
  return layout;
}

namespace {

const double* slot_ref(const ModelForm& form, const ParamSlot& slot) {
  switch (slot.block) {
    case ParamBlock::linear_theta:
      return &form.linear.coeffs.values(slot.row, slot.col);
    case ParamBlock::numerator_theta:
      return &form.numerator.coeffs.values(slot.row, slot.col);
    case ParamBlock::denominator_theta:
      return &form.denominator.coeffs.values(slot.row, slot.col);
    case ParamBlock::linear_eta:
      return &form.linear.dict.eta[slot.row];
    case ParamBlock::numerator_eta:
      return &form.numerator.dict.eta[slot.row];
    case ParamBlock::denominator_eta:
      return &form.denominator.dict.eta[slot.row];
  }
  return nullptr;
}

double* slot_ref(ModelForm& form, const ParamSlot& slot) {
  return const_cast<double*>(slot_ref(static_cast<const ModelForm&>(form), slot));
}

bool is_theta(ParamBlock block) {
  return block == ParamBlock::linear_theta || block == ParamBlock::numerator_theta ||
         block == ParamBlock::denominator_theta;
}

}  // namespace

std::vector<double> pack(const ModelForm& form, const ParamLayout& layout) {
  std::vector<double> values(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i)
    values[i] = *slot_ref(form, layout.slots[i]);
  return values;
}

void unpack(ModelForm& form, const ParamLayout& layout, std::span<const double> values) {
  if (values.size() != layout.size()) throw DimensionError("value size does not match layout");
  for (std::size_t i = 0; i < layout.size(); ++i) *slot_ref(form, layout.slots[i]) = values[i];
}

// ───────────────────────── loss and gradient engine ─────────────────────────

namespace {

// Dense gradient accumulators mirroring the model blocks. Masked entries are
// accumulated too but never packed, which keeps the inner loops branch-free.
struct GradBuffers {
  Matrix lin, num, den;
  std::vector<double> eta_lin, eta_num, eta_den;

  void resize(const ModelForm& form) {
    auto ensure = [](Matrix& m, std::size_t r, std::size_t c) {
      if (m.rows() != r || m.cols() != c) m = Matrix(r, c);
    };
    if (form.has_linear()) {
      ensure(lin, form.linear.dict.size(), form.state_dim);
      eta_lin.assign(form.linear.dict.eta.size(), 0.0);
    }
    if (form.has_rational()) {
      ensure(num, form.numerator.dict.size(), form.state_dim);
      ensure(den, form.denominator.dict.size(), form.state_dim);
      eta_num.assign(form.numerator.dict.eta.size(), 0.0);
      eta_den.assign(form.denominator.dict.eta.size(), 0.0);
    }
    clear();
  }
  void clear() {
    auto zero = [](Matrix& m) { std::fill(m.data(), m.data() + m.rows() * m.cols(), 0.0); };
    zero(lin);
    zero(num);
    zero(den);
    std::fill(eta_lin.begin(), eta_lin.end(), 0.0);
    std::fill(eta_num.begin(), eta_num.end(), 0.0);
    std::fill(eta_den.begin(), eta_den.end(), 0.0);
  }
};

// grad_theta[j][k] += weight_k * dphi_j  (outer product accumulate).
void accumulate_outer(Matrix& grad, std::span<const double> phi, std::span<const double> w) {
  const std::size_t d = phi.size();
  const std::size_t n = w.size();
  for (std::size_t j = 0; j < d; ++j) {
    const double pj = phi[j];
    if (pj == 0.0) continue;
    double* row = grad.data() + j * n;
    for (std::size_t k = 0; k < n; ++k) row[k] += pj * w[k];
  }
}

// Accumulates a_k * d f_k / d eta over one stage for one part.
void accumulate_eta(const ModelPart& part, const detail::StageRecord& rec,
                    std::span<const double> w, std::vector<double>& eta_grad,
                    std::vector<double>& scratch) {
  const std::size_t d = part.dict.size();
  const std::size_t n = w.size();
  for (std::size_t e = 0; e < part.dict.eta.size(); ++e) {
    scratch.resize(d);
    evaluate_eta_derivative(part.dict, rec.v, static_cast<int>(e), scratch);
    double sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (scratch[j] == 0.0) continue;
      const double* theta = part.coeffs.values.data() + j * n;
      for (std::size_t k = 0; k < n; ++k) sum += scratch[j] * theta[k] * w[k];
    }
    eta_grad[e] += sum;
  }
}

class Engine {
 public:
  Engine(const ModelForm& form, const LossConfig& cfg, GradBuffers* grads)
      : form_(form), cfg_(cfg), grads_(grads) {}

  // Returns the per-direction fidelity mean; adds this direction's exact
  // gradient contribution (already scaled by `direction_weight`).
  double run_pair(const PredictionPair& pair, double direction_weight,
                  std::size_t& poisoned) {
    const std::size_t n = form_.state_dim;
    const std::size_t m = pair.inputs.cols();
    const std::size_t p = pair.params.cols();
    const std::size_t aug = n + m + p;
    for (auto& rec : stage_) rec.resize(form_, aug);

    v_.resize(aug);
    lambda_.resize(n);
    a_[0].resize(n);
    a_[1].resize(n);
    a_[2].resize(n);
    a_[3].resize(n);

    const double w2 = cfg_.weights == Rk4Weights::uniform ? 1.0 : 2.0;
    const double rows = static_cast<double>(pair.rows());
    const double mean_scale = 1.0 / (rows * static_cast<double>(n));

    double sum = 0.0;
    for (std::size_t r = 0; r < pair.rows(); ++r) {
      const double h = pair.steps[r];
      auto x = pair.sources.row(r);
      for (std::size_t j = 0; j < m; ++j) v_[n + j] = pair.inputs(r, j);
      for (std::size_t j = 0; j < p; ++j) v_[n + m + j] = pair.params(r, j);

      bool ok = true;
      const double frac[4] = {0.0, 0.5 * h, 0.5 * h, h};
      for (int s = 0; s < 4 && ok; ++s) {
        const auto& prev = s == 0 ? stage_[0].f : stage_[s - 1].f;  // unused when s==0
        for (std::size_t i = 0; i < n; ++i)
          v_[i] = s == 0 ? x[i] : x[i] + frac[s] * prev[i];
        ok = grads_ ? detail::eval_stage_full(form_, v_, cfg_.denominator_floor, stage_[s])
                    : detail::eval_stage_values(form_, v_, cfg_.denominator_floor, stage_[s]);
      }

      double row_sum = 0.0;
      if (ok) {
        for (std::size_t i = 0; i < n; ++i) {
          const double pred =
              x[i] + h / 6.0 *
                         (stage_[0].f[i] + w2 * stage_[1].f[i] + w2 * stage_[2].f[i] +
                          stage_[3].f[i]);
          const double resid = pair.targets(r, i) - pred;
          lambda_[i] = resid;
          row_sum += resid * resid;
        }
        ok = std::isfinite(row_sum);
      }

      if (!ok) {
        ++poisoned;
        sum += cfg_.penalty_value * static_cast<double>(n);
        continue;
      }
      sum += row_sum;

      if (grads_) {
        // Seed dL/dpred and run the chain rule back through the stages.
        const double seed = -2.0 * mean_scale * direction_weight;
        for (std::size_t i = 0; i < n; ++i) lambda_[i] *= seed;

        const double c1 = h / 6.0, c2 = w2 * h / 6.0, c3 = w2 * h / 6.0, c4 = h / 6.0;
        for (std::size_t i = 0; i < n; ++i) a_[3][i] = c4 * lambda_[i];
        adjoint_step(stage_[3].jac, a_[3], h, c3, a_[2]);
        adjoint_step(stage_[2].jac, a_[2], 0.5 * h, c2, a_[1]);
        adjoint_step(stage_[1].jac, a_[1], 0.5 * h, c1, a_[0]);
        for (int s = 0; s < 4; ++s) accumulate_stage(stage_[s], a_[s]);
      }
    }
    return sum * mean_scale;
  }

 private:
  // prev = c * lambda + step * J^T next.
  void adjoint_step(const Matrix& jac, const std::vector<double>& next, double step, double c,
                    std::vector<double>& prev) {
    const std::size_t n = next.size();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = c * lambda_[i];
      for (std::size_t k = 0; k < n; ++k) acc += step * jac(k, i) * next[k];
      prev[i] = acc;
    }
  }

  void accumulate_stage(const detail::StageRecord& rec, const std::vector<double>& a) {
    const std::size_t n = form_.state_dim;
    if (form_.has_linear()) {
      accumulate_outer(grads_->lin, rec.phi_lin, a);
      if (!form_.linear.dict.eta.empty())
        accumulate_eta(form_.linear, rec, a, grads_->eta_lin, eta_scratch_);
    }
    if (form_.has_rational()) {
      // d f_k / d theta_g[j][k] = phi_g_j / den_k
      // d f_k / d theta_h[j][k] = -num_k phi_h_j / den_k^2
      wnum_.resize(n);
      wden_.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        wnum_[k] = a[k] / rec.den[k];
        wden_[k] = -a[k] * rec.num[k] / (rec.den[k] * rec.den[k]);
      }
      accumulate_outer(grads_->num, rec.phi_num, wnum_);
      accumulate_outer(grads_->den, rec.phi_den, wden_);
      if (!form_.numerator.dict.eta.empty())
        accumulate_eta(form_.numerator, rec, wnum_, grads_->eta_num, eta_scratch_);
      if (!form_.denominator.dict.eta.empty())
        accumulate_eta(form_.denominator, rec, wden_, grads_->eta_den, eta_scratch_);
    }
  }

  const ModelForm& form_;
  const LossConfig& cfg_;
  GradBuffers* grads_;
  detail::StageRecord stage_[4];
  std::vector<double> v_, lambda_;
  std::vector<double> a_[4];
  std::vector<double> wnum_, wden_, eta_scratch_;
};

double l1_term(const ModelForm& form) {
  double sum = 0.0;
  auto add = [&](const ModelPart& part) {
    const auto& vals = part.coeffs.values;
    for (std::size_t j = 0; j < vals.rows(); ++j)
      for (std::size_t k = 0; k < vals.cols(); ++k)
        if (part.coeffs.active(j, k)) sum += std::abs(vals(j, k));
  };
  if (form.has_linear()) add(form.linear);
  if (form.has_rational()) {
    add(form.numerator);
    add(form.denominator);
  }
  return sum;
}

}  // namespace

LossBreakdown loss_breakdown(const ModelForm& form, std::span<const PredictionPair> pairs,
                             const LossConfig& cfg) {
  if (pairs.empty()) throw InsufficientDataError("loss needs at least one prediction pair");
  LossBreakdown out;
  Engine engine(form, cfg, nullptr);
  const double dir_weight = 1.0 / static_cast<double>(pairs.size());
  for (const auto& pair : pairs)
    out.fidelity += dir_weight * engine.run_pair(pair, dir_weight, out.poisoned_rows);
  out.l1 = cfg.l1_weight * l1_term(form);
  out.total = out.fidelity + out.l1;
  return out;
}

double loss(const ModelForm& form, std::span<const PredictionPair> pairs,
            const LossConfig& cfg) {
  return loss_breakdown(form, pairs, cfg).total;
}

namespace {

std::vector<double> pack_gradient(const ModelForm& form, const ParamLayout& layout,
                                  const GradBuffers& grads, double l1_weight) {
  std::vector<double> out(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& slot = layout.slots[i];
    double g = 0.0;
    switch (slot.block) {
      case ParamBlock::linear_theta:
        g = grads.lin(slot.row, slot.col);
        break;
      case ParamBlock::numerator_theta:
        g = grads.num(slot.row, slot.col);
        break;
      case ParamBlock::denominator_theta:
        g = grads.den(slot.row, slot.col);
        break;
      case ParamBlock::linear_eta:
        g = grads.eta_lin[slot.row];
        break;
      case ParamBlock::numerator_eta:
        g = grads.eta_num[slot.row];
        break;
      case ParamBlock::denominator_eta:
        g = grads.eta_den[slot.row];
        break;
    }
    if (l1_weight != 0.0 && is_theta(slot.block)) {
      const double value = *slot_ref(form, slot);
      // Subgradient with sign(0) = 0.
      g += l1_weight * (value > 0.0 ? 1.0 : value < 0.0 ? -1.0 : 0.0);
    }
    out[i] = g;
  }
  return out;
}

double loss_and_gradient(const ModelForm& form, std::span<const PredictionPair> pairs,
                         const LossConfig& cfg, const ParamLayout& layout, GradBuffers& grads,
                         std::vector<double>& grad_out) {
  grads.resize(form);
  Engine engine(form, cfg, &grads);
  double fidelity = 0.0;
  std::size_t poisoned = 0;
  const double dir_weight = 1.0 / static_cast<double>(pairs.size());
  for (const auto& pair : pairs)
    fidelity += dir_weight * engine.run_pair(pair, dir_weight, poisoned);
  grad_out = pack_gradient(form, layout, grads, cfg.l1_weight);
  return fidelity + cfg.l1_weight * l1_term(form);
}

}  // namespace

std::vector<double> gradient(const ModelForm& form, std::span<const PredictionPair> pairs,
                             const LossConfig& cfg, const ParamLayout& layout) {
  if (pairs.empty()) throw InsufficientDataError("gradient needs at least one prediction pair");
  GradBuffers grads;
  std::vector<double> out;
  loss_and_gradient(form, pairs, cfg, layout, grads, out);
  return out;
}

// ───────────────────────── optimizer ─────────────────────────

OptimizeResult optimize(ModelForm& form, std::span<const PredictionPair> pairs,
                        const LossConfig& loss_cfg, const OptimizerConfig& opt_cfg) {
  if (pairs.empty()) throw InsufficientDataError("optimize needs at least one prediction pair");
  form.validate();

  const ParamLayout layout = ParamLayout::build(form);
  OptimizeResult result;
  if (layout.size() == 0) {
    result.final_loss = loss(form, pairs, loss_cfg);
    result.converged = true;
    return result;
  }

  std::vector<double> theta = pack(form, layout);
  std::vector<double> best_theta = theta;
  std::vector<double> grad;
  std::vector<double> m(layout.size(), 0.0), v(layout.size(), 0.0);
  GradBuffers grads;

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double lr = opt_cfg.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  double window_best = std::numeric_limits<double>::infinity();
  int moment_step = 0;

  for (int iter = 0; iter < opt_cfg.max_iters; ++iter) {
    unpack(form, layout, theta);
    const double current = loss_and_gradient(form, pairs, loss_cfg, layout, grads, grad);

    if (!std::isfinite(current) || current > opt_cfg.divergence_limit) {
      // One catastrophic step is recoverable while the step size can still
      // shrink; diverged means even the smallest step explodes from the best
      // point seen so far.
      if (lr <= opt_cfg.min_learning_rate) {
        unpack(form, layout, best_theta);
        throw DivergenceError("optimizer diverged", static_cast<std::size_t>(iter));
      }
      lr = std::max(lr * opt_cfg.decay, opt_cfg.min_learning_rate);
      theta = best_theta;
      std::fill(m.begin(), m.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      moment_step = 0;
      result.iterations = iter + 1;
      continue;
    }
    if (current < best) {
      best = current;
      best_theta = theta;
    }

    ++moment_step;
    const double bc1 = 1.0 - std::pow(beta1, moment_step);
    const double bc2 = 1.0 - std::pow(beta2, moment_step);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
    result.iterations = iter + 1;

    if ((iter + 1) % opt_cfg.window == 0) {
      const double improvement =
          (window_best - best) / std::max(std::abs(window_best), 1e-300);
      if (improvement < opt_cfg.rel_tol && lr <= opt_cfg.min_learning_rate) {
        result.converged = true;
        break;
      }
      if (improvement < opt_cfg.stall_tol) {
        // Plateau at this step size: restart the moments from the best point
        // with a smaller step.
        lr = std::max(lr * opt_cfg.decay, opt_cfg.min_learning_rate);
        theta = best_theta;
        std::fill(m.begin(), m.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        moment_step = 0;
      }
      window_best = best;
    }
  }

  unpack(form, layout, best_theta);
  result.final_loss = best;
  return result;
}

// ───────────────────────── ridge warm start ─────────────────────────

void ridge_warm_start(ModelForm& form, const PredictionPair& forward, double ridge) {
  if (forward.direction != PairDirection::forward)
    throw std::invalid_argument("warm start expects the forward pair");
  const std::size_t n = form.state_dim;
  const std::size_t m = forward.inputs.cols();
  const std::size_t p = forward.params.cols();
  const std::size_t aug = n + m + p;

  // Every pair row yields a central difference on the staggered grid: the
  // secant (target - source)/h estimates the derivative at the midpoint
  // state to O(h^2), with no adjacency requirement between rows.
  if (forward.rows() == 0)
    throw InsufficientDataError("not enough samples for the warm start");

  Matrix points(forward.rows(), aug);
  Matrix derivs(forward.rows(), n);
  for (std::size_t r = 0; r < forward.rows(); ++r) {
    for (std::size_t i = 0; i < n; ++i)
      points(r, i) = 0.5 * (forward.sources(r, i) + forward.targets(r, i));
    for (std::size_t j = 0; j < m; ++j) points(r, n + j) = forward.inputs(r, j);
    for (std::size_t j = 0; j < p; ++j) points(r, n + m + j) = forward.params(r, j);
    for (std::size_t i = 0; i < n; ++i)
      derivs(r, i) = (forward.targets(r, i) - forward.sources(r, i)) / forward.steps[r];
  }

  auto features = [&](const Dictionary& dict) -> Eigen::MatrixXd {
    Matrix phi = evaluate(dict, points);
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(phi.data(), phi.rows(), phi.cols());
  };

  const bool rational = form.has_rational();
  const Eigen::MatrixXd phi_lin =
      form.has_linear() ? features(form.linear.dict) : Eigen::MatrixXd();
  const Eigen::MatrixXd phi_num = rational ? features(form.numerator.dict) : Eigen::MatrixXd();
  const Eigen::MatrixXd phi_den =
      rational ? features(form.denominator.dict) : Eigen::MatrixXd();

  // Per equation: collect the active columns of every block, using the
  // implicit arrangement dx * (c + h) = k * (c + h) + g linearized as
  // [phi_lin, phi_g, -dx .* phi_h] once rational parts are present. The
  // linear-in-unknowns fit ignores the k*h cross term, which is fine for a
  // starting point.
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::VectorXd b(forward.rows());
    for (std::size_t r = 0; r < forward.rows(); ++r) b(r) = derivs(r, k);

    struct ColRef {
      ParamBlock block;
      std::size_t feature;
    };
    std::vector<ColRef> cols;
    if (form.has_linear())
      for (std::size_t j = 0; j < form.linear.dict.size(); ++j)
        if (form.linear.coeffs.active(j, k)) cols.push_back({ParamBlock::linear_theta, j});
    if (rational) {
      for (std::size_t j = 0; j < form.numerator.dict.size(); ++j)
        if (form.numerator.coeffs.active(j, k)) cols.push_back({ParamBlock::numerator_theta, j});
      for (std::size_t j = 0; j < form.denominator.dict.size(); ++j)
        if (form.denominator.coeffs.active(j, k))
          cols.push_back({ParamBlock::denominator_theta, j});
    }
    if (cols.empty()) continue;

    Eigen::MatrixXd A(forward.rows(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      switch (cols[c].block) {
        case ParamBlock::linear_theta:
          A.col(c) = phi_lin.col(cols[c].feature);
          break;
        case ParamBlock::numerator_theta:
          A.col(c) = phi_num.col(cols[c].feature);
          break;
        default:
          A.col(c) = -b.cwiseProduct(phi_den.col(cols[c].feature));
          break;
      }
    }
    const double c0 = form.denominator_constant;
    Eigen::MatrixXd gram = A.transpose() * A;
    gram.diagonal().array() += ridge;
    const Eigen::VectorXd sol = gram.ldlt().solve(A.transpose() * (rational ? (c0 * b).eval() : b));

    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double value = sol(static_cast<Eigen::Index>(c));
      switch (cols[c].block) {
        case ParamBlock::linear_theta:
          form.linear.coeffs.values(cols[c].feature, k) = value;
          break;
        case ParamBlock::numerator_theta:
          form.numerator.coeffs.values(cols[c].feature, k) = value;
          break;
        default:
          form.denominator.coeffs.values(cols[c].feature, k) = value;
          break;
      }
    }
  }

  // A derivative fit on coarse or noisy data can land where the composed step
  // explodes, handing the optimizer a point already past its divergence limit
  // or with every row poisoned (zero gradient). Shrink toward zero until the
  // one-step loss is finite, modest, and fully evaluated.
  const LossConfig probe;
  auto shrink = [](ModelPart& part) {
    auto& vals = part.coeffs.values;
    for (std::size_t j = 0; j < vals.rows(); ++j)
      for (std::size_t c = 0; c < vals.cols(); ++c) vals(j, c) *= 0.5;
  };
  for (int tries = 0; tries < 200; ++tries) {
    const LossBreakdown bd = loss_breakdown(form, std::span(&forward, 1), probe);
    if (std::isfinite(bd.total) && bd.total < 1e8 && bd.poisoned_rows == 0) break;
    if (form.has_linear()) shrink(form.linear);
    if (form.has_rational()) {
      shrink(form.numerator);
      shrink(form.denominator);
    }
  }
}

}  // namespace rksindy
