#include "rksindy/sparsify.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rksindy/errors.hpp"

namespace rksindy {

namespace {

// Applies fn to every coefficient block of the form that carries thetas.
template <typename Fn>
void for_each_block(ModelForm& form, Fn&& fn) {
  if (form.has_linear()) fn(form.linear.coeffs);
  if (form.has_rational()) {
    fn(form.numerator.coeffs);
    fn(form.denominator.coeffs);
  }
}

// Deactivates every active coefficient with magnitude below lambda.
// Returns the number of pruned entries.
std::size_t prune_below(ModelForm& form, double lambda) {
  std::size_t pruned = 0;
  for_each_block(form, [&](CoefficientMatrix& block) {
    for (std::size_t j = 0; j < block.values.rows(); ++j)
      for (std::size_t k = 0; k < block.values.cols(); ++k)
        if (block.active(j, k) && std::abs(block.values(j, k)) < lambda) {
          block.deactivate(j, k);
          ++pruned;
        }
  });
  return pruned;
}

// Smallest magnitude among active coefficients, or +inf when none remain.
double smallest_active(ModelForm& form) {
  double best = std::numeric_limits<double>::infinity();
  for_each_block(form, [&](CoefficientMatrix& block) {
    for (std::size_t j = 0; j < block.values.rows(); ++j)
      for (std::size_t k = 0; k < block.values.cols(); ++k)
        if (block.active(j, k)) best = std::min(best, std::abs(block.values(j, k)));
  });
  return best;
}

// Deactivates every active coefficient whose magnitude ties the minimum.
std::size_t prune_smallest(ModelForm& form) {
  const double target = smallest_active(form);
  if (!std::isfinite(target)) return 0;
  std::size_t pruned = 0;
  for_each_block(form, [&](CoefficientMatrix& block) {
    for (std::size_t j = 0; j < block.values.rows(); ++j)
      for (std::size_t k = 0; k < block.values.cols(); ++k)
        if (block.active(j, k) && std::abs(block.values(j, k)) == target) {
          block.deactivate(j, k);
          ++pruned;
        }
  });
  return pruned;
}

ParetoPoint make_point(const ModelForm& form, double loss_value) {
  ParetoPoint point;
  point.nonzero_count = form.nonzero_count();
  point.loss_value = loss_value;
  point.snapshot = form;
  return point;
}

// Pareto points and tolerance checks track the data-fidelity part only; the
// l1 term is an optimization device, not a model-quality measure.
double fidelity(const ModelForm& form, std::span<const PredictionPair> pairs,
                const LossConfig& cfg) {
  return loss_breakdown(form, pairs, cfg).fidelity;
}

}  // namespace

DiscoveredModel fixed_cutoff_discover(ModelForm form, std::span<const PredictionPair> pairs,
                                      const LossConfig& loss_cfg, const OptimizerConfig& opt_cfg,
                                      double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("cutoff must be non-negative");
  form.validate();

  DiscoveredModel model;
  optimize(form, pairs, loss_cfg, opt_cfg);
  model.pareto.push_back(make_point(form, fidelity(form, pairs, loss_cfg)));

  constexpr std::size_t kMaxSweeps = 100;
  std::size_t sweep = 0;
  while (prune_below(form, lambda) > 0) {
    if (++sweep > kMaxSweeps) {
      model.warnings.push_back("cutoff iteration did not stabilize; stopping early");
      break;
    }
    if (form.nonzero_count() == 0) {
      model.warnings.push_back("cutoff removed every term; the model is identically zero");
      model.pareto.push_back(make_point(form, fidelity(form, pairs, loss_cfg)));
      break;
    }
    optimize(form, pairs, loss_cfg, opt_cfg);
    model.pareto.push_back(make_point(form, fidelity(form, pairs, loss_cfg)));
  }

  model.selected_index = model.pareto.size() - 1;
  model.form = std::move(form);
  return model;
}

DiscoveredModel iterative_cutoff_discover(ModelForm form, std::span<const PredictionPair> pairs,
                                          const LossConfig& loss_cfg,
                                          const OptimizerConfig& opt_cfg, double tol) {
  form.validate();

  DiscoveredModel model;
  optimize(form, pairs, loss_cfg, opt_cfg);
  double fid = fidelity(form, pairs, loss_cfg);
  model.pareto.push_back(make_point(form, fid));

  // A non-positive tolerance derives the acceptance band from the dense
  // solve: anything within an order of magnitude counts as equal fidelity.
  const double tol_eff = tol > 0.0 ? tol : 10.0 * std::max(fid, 1e-16);

  while (form.nonzero_count() > 0 && model.pareto.back().loss_value <= tol_eff) {
    if (prune_smallest(form) == 0) break;
    if (form.nonzero_count() == 0) {
      model.pareto.push_back(make_point(form, fidelity(form, pairs, loss_cfg)));
      break;
    }
    // The surviving values are one candidate start; a fresh derivative-based
    // seed on the pruned support is another. Rational valleys regularly trap
    // the inherited start, so keep whichever re-optimization fits better.
    ModelForm reseeded = form;
    optimize(form, pairs, loss_cfg, opt_cfg);
    fid = fidelity(form, pairs, loss_cfg);
    try {
      ridge_warm_start(reseeded, pairs.front());
      optimize(reseeded, pairs, loss_cfg, opt_cfg);
      const double reseeded_fid = fidelity(reseeded, pairs, loss_cfg);
      if (reseeded_fid < fid) {
        form = std::move(reseeded);
        fid = reseeded_fid;
      }
    } catch (const std::exception&) {
      // No usable seed (backward-only pairs, too few contiguous samples):
      // the inherited-start result stands.
    }
    model.pareto.push_back(make_point(form, fid));
  }

  // Sparsest point that still meets the tolerance. Points are ordered by
  // strictly decreasing support, so scan from the back.
  std::size_t selected = 0;
  bool found = false;
  for (std::size_t i = model.pareto.size(); i-- > 0;) {
    if (model.pareto[i].loss_value <= tol_eff) {
      selected = i;
      found = true;
      break;
    }
  }
  if (!found) {
    model.warnings.push_back("no candidate met the tolerance; keeping the dense solution");
    selected = 0;
  }

  model.selected_index = selected;
  model.form = model.pareto[selected].snapshot;
  return model;
}

std::vector<DegreeAssessment> degree_assessment(const TrajectorySet& data, int max_degree,
                                                const LossConfig& loss_cfg,
                                                const OptimizerConfig& opt_cfg,
                                                bool include_constant) {
  if (max_degree < 1) throw std::invalid_argument("max_degree must be at least 1");
  data.validate();

  std::vector<PredictionPair> pairs;
  pairs.push_back(build_pairs(data, PairDirection::forward));
  if (loss_cfg.use_backward) pairs.push_back(build_pairs(data, PairDirection::backward));

  std::vector<DegreeAssessment> table;
  table.reserve(static_cast<std::size_t>(max_degree));
  for (int degree = 1; degree <= max_degree; ++degree) {
    const std::size_t num_vars = data.state_dim() + data.input_dim() + data.param_dim();
    auto dict = build_polynomial_dictionary(num_vars, degree, include_constant);
    auto form = make_plain_form(std::move(dict), data.state_dim());
    ridge_warm_start(form, pairs.front());
    const auto result = optimize(form, pairs, loss_cfg, opt_cfg);
    table.push_back({degree, result.final_loss});
  }
  return table;
}

}  // namespace rksindy
