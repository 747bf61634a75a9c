#pragma once

#include "loggle/simulation.hpp"
#include "loggle/types.hpp"

#include <limits>
#include <vector>

namespace loggle {

struct MetricsReport
{
    double fdr = 0.0;
    double power = 0.0;
    double f1 = 0.0;
    /// NaN when no precision estimates were supplied.
    double kl = std::numeric_limits<double>::quiet_NaN();
    /// Fit times with no estimated edges (FDR term taken as 0).
    std::vector<double> empty_estimate_times;
    /// Fit times where the true graph has no edges (power term taken as 1).
    std::vector<double> empty_truth_times;
};

/// tr(A B^{-1}) - log|A B^{-1}| - p for the estimate A and the truth B.
double kl_divergence(const Matrix& estimate, const Matrix& truth);

/// F1 composed from averaged FDR and power; 0 when both parts vanish.
double f1_score(double fdr, double power);

/// FDR, power and F1 against true edge sets, averaged over times. `truth`, `estimates`
/// and `times` align by index; `precisions` and `true_precisions` may be empty (no KL).
MetricsReport compute_metrics(const std::vector<EdgeSet>& truth,
                              const std::vector<EdgeSet>& estimates,
                              const std::vector<double>& times,
                              const std::vector<Matrix>& true_precisions = {},
                              const std::vector<Matrix>& precisions = {});

/// Convenience overload evaluating the model at the fit times.
MetricsReport compute_metrics(const SimulationModel& model,
                              const std::vector<EdgeSet>& estimates,
                              const std::vector<Matrix>& precisions,
                              const std::vector<double>& times);

}  // namespace loggle
