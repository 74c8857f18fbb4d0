#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rksindy/model.hpp"
#include "rksindy/preprocess.hpp"
#include "rksindy/regression.hpp"
#include "rksindy/rk4.hpp"

namespace rksindy {

/// One point of the sparsity-fidelity trade-off curve.
struct ParetoPoint {
  std::size_t nonzero_count = 0;
  double loss_value = 0.0;
  ModelForm snapshot;
};

struct DiscoveredModel {
  std::string method = "rk-sindy";
  ModelForm form;
  NormalizationRecord normalization;  // identity when discovery ran on raw data
  std::vector<ParetoPoint> pareto;    // iterative mode only
  std::size_t selected_index = 0;     // into pareto when non-empty
  std::vector<std::string> warnings;
  std::string provenance;  // resolved run configuration as JSON text
};

/// Fixed-cutoff sparsification: optimize, mask every active coefficient with
/// magnitude below lambda, and repeat until no active coefficient falls
/// below the cutoff. Coefficients surviving a round keep their values as the
/// warm start of the next solve. Masking everything is reported through a
/// warning, not an error.
DiscoveredModel fixed_cutoff_discover(ModelForm form, std::span<const PredictionPair> pairs,
                                      const LossConfig& loss_cfg, const OptimizerConfig& opt_cfg,
                                      double lambda);

/// Iterative-cutoff sparsification: after each solve the smallest-magnitude
/// active coefficient (plus exact ties) is masked and the model re-solved,
/// recording one Pareto point per solve, until the fidelity loss exceeds
/// `tol` or nothing is left. The selected model is the sparsest recorded
/// point with loss <= tol. tol <= 0 requests the default of 10x the dense
/// first-solve loss.
DiscoveredModel iterative_cutoff_discover(ModelForm form, std::span<const PredictionPair> pairs,
                                          const LossConfig& loss_cfg,
                                          const OptimizerConfig& opt_cfg, double tol);

struct DegreeAssessment {
  int degree = 0;
  double loss_value = 0.0;
};

/// Fits a dense (unmasked, unthresholded) polynomial model for every degree
/// 1..max_degree and reports the converged fidelity loss. A sharp drop
/// followed by a plateau localizes the polynomial order of the dynamics.
std::vector<DegreeAssessment> degree_assessment(const TrajectorySet& data, int max_degree,
                                                const LossConfig& loss_cfg,
                                                const OptimizerConfig& opt_cfg,
                                                bool include_constant = true);

}  // namespace rksindy
