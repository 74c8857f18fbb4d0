#pragma once

#include <string>
#include <vector>

#include "rksindy/dictionary.hpp"
#include "rksindy/matrix.hpp"
#include "rksindy/sparsify.hpp"
#include "rksindy/trajectory.hpp"

namespace rksindy {

enum class DerivativeMethod { central_difference, savgol };

/// Pointwise derivative estimates at interior samples. `sample_indices`
/// names the trajectory rows the estimates belong to.
struct DerivativeEstimate {
  DerivativeMethod method = DerivativeMethod::central_difference;
  std::vector<std::size_t> sample_indices;
  Matrix values;
};

/// Central differences (x_{k+1} - x_{k-1}) / (t_{k+1} - t_{k-1}) at interior
/// points, or a Savitzky-Golay derivative (uniform grids only).
DerivativeEstimate estimate_derivatives(const Trajectory& traj, DerivativeMethod method,
                                        int window = 11, int polyorder = 3);

/// Sequential thresholded least squares: alternate an (optionally ridge
/// stabilized) least-squares solve on the active set with zeroing of
/// coefficients below lambda, until the active set is stable. Rank-deficient
/// active sets fall back to ridge 1e-10 and append a warning.
CoefficientMatrix stlsq(const Matrix& features, const Matrix& targets, double lambda,
                        int max_rounds = 25, std::vector<std::string>* warnings = nullptr);

/// The classical derivative-based pipeline on a shared dictionary, packaged
/// like the main method so the two can be compared side by side. The result
/// is tagged method = "std-sindy".
DiscoveredModel baseline_discover(const TrajectorySet& data, const Dictionary& dict,
                                  double lambda,
                                  DerivativeMethod method = DerivativeMethod::central_difference,
                                  int window = 11, int polyorder = 3);

}  // namespace rksindy
