#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rksindy/model.hpp"
#include "rksindy/rk4.hpp"

namespace rksindy {

struct LossConfig {
  double l1_weight = 0.0;
  bool use_backward = false;  // informational; loss averages whatever pairs it gets
  double denominator_floor = 1e-3;
  double penalty_value = 1e6;  // per poisoned component, added to the squared mean
  Rk4Weights weights = Rk4Weights::classical;
};

/// Which trainable a flat parameter index refers to.
enum class ParamBlock : std::uint8_t {
  linear_theta,
  numerator_theta,
  denominator_theta,
  linear_eta,
  numerator_eta,
  denominator_eta,
};

struct ParamSlot {
  ParamBlock block;
  std::uint32_t row = 0;  // feature index (theta) or eta index
  std::uint32_t col = 0;  // equation index (theta only)
};

/// Enumeration of the trainables of a model: every unmasked coefficient plus
/// every eta. Masked entries have no slot, so they can never receive an
/// update. Rebuild after any mask change.
struct ParamLayout {
  std::vector<ParamSlot> slots;

  [[nodiscard]] std::size_t size() const { return slots.size(); }
  static ParamLayout build(const ModelForm& form);
};

[[nodiscard]] std::vector<double> pack(const ModelForm& form, const ParamLayout& layout);
void unpack(ModelForm& form, const ParamLayout& layout, std::span<const double> values);

struct LossBreakdown {
  double total = 0.0;
  double fidelity = 0.0;  // mean squared residual, averaged over directions
  double l1 = 0.0;
  std::size_t poisoned_rows = 0;
};

/// Mean over pair rows and state components of the squared one-step
/// prediction residual, plus l1_weight * sum |active theta|. With both a
/// forward and a backward pair the two per-direction means get equal weight.
[[nodiscard]] LossBreakdown loss_breakdown(const ModelForm& form,
                                           std::span<const PredictionPair> pairs,
                                           const LossConfig& cfg);
[[nodiscard]] double loss(const ModelForm& form, std::span<const PredictionPair> pairs,
                          const LossConfig& cfg);

/// Exact gradient of the loss with respect to the layout's trainables,
/// obtained by running the chain rule backwards through the four stages.
/// Poisoned rows contribute zero. The l1 subgradient uses sign(0) = 0.
[[nodiscard]] std::vector<double> gradient(const ModelForm& form,
                                           std::span<const PredictionPair> pairs,
                                           const LossConfig& cfg, const ParamLayout& layout);

struct OptimizerConfig {
  double learning_rate = 1e-2;
  int max_iters = 10000;
  double rel_tol = 1e-10;  // windowed relative improvement that counts as converged
  int window = 50;
  std::uint64_t seed = 0;  // recorded for provenance; the solve itself is deterministic
  // Plateau schedule: when a window improves by less than stall_tol the step
  // size is multiplied by decay, down to min_learning_rate. Convergence at
  // the smallest step ends the run.
  double stall_tol = 1e-5;
  double decay = 0.25;
  double min_learning_rate = 1e-7;
  double divergence_limit = 1e12;
};

struct OptimizeResult {
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Full-batch adaptive-moment descent on the active coefficients and etas,
/// starting from the values already in `form`. Tracks and returns the best
/// point seen. Throws DivergenceError (with the model restored to the best
/// point) when the loss exceeds divergence_limit.
OptimizeResult optimize(ModelForm& form, std::span<const PredictionPair> pairs,
                        const LossConfig& loss_cfg, const OptimizerConfig& opt_cfg);

/// Initializes coefficients from a ridge least-squares fit of secant
/// derivative estimates taken at the midpoint state of every forward pair
/// row. Rational and extended forms use the implicit arrangement
/// dx (c + h) = g, linear in the unknowns. When the resulting start is
/// unusable (non-finite or poisoned loss) the coefficients are halved until
/// it is.
void ridge_warm_start(ModelForm& form, const PredictionPair& forward, double ridge = 1e-8);

}  // namespace rksindy
