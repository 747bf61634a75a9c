#pragma once

#include "loggle/admm.hpp"
#include "loggle/dataset.hpp"
#include "loggle/engine.hpp"
#include "loggle/kernel.hpp"
#include "loggle/refit.hpp"
#include "loggle/screening.hpp"
#include "loggle/types.hpp"

#include <string>
#include <vector>

namespace loggle {

struct FitConfig
{
    Method method = Method::Loggle;
    SolverKind solver = SolverKind::Likelihood;
    KernelSpec kernel;
    /// One value (broadcast) or one per fit time. Ignored by kernel (d = 0) and invar (full window).
    std::vector<double> d = {0.2};
    /// One value (broadcast) or one per fit time.
    std::vector<double> lambda = {0.25};
    /// Times to estimate graphs at; empty means the distinct observation times.
    std::vector<double> fit_times;
    AdmmSettings admm;
    RefitSettings refit;
    bool as_correlation = true;
    /// 0 picks the hardware concurrency (1 under LOGGLE_DETERMINISTIC).
    unsigned threads = 0;

    /// Throws ParameterError on inconsistent settings.
    void validate() const;
    double d_at(std::size_t k) const;
    double lambda_at(std::size_t k) const;
};

/// Fit times in effect for a dataset: the configured list, or the distinct observation times.
std::vector<double> resolve_fit_times(const TimeSeriesDataset& data, const std::vector<double>& requested);

struct TimeFit
{
    double time = 0.0;
    double d = 0.0;
    double lambda = 0.0;
    bool ok = false;
    bool non_converged = false;
    std::string error;

    /// Support of the refit matrix.
    EdgeSet edges;
    /// Support of the penalised fit at this time.
    EdgeSet solver_edges;
    /// Refit precision on the scale the model was fitted on (correlations when as_correlation).
    Matrix precision;
    /// Standard deviations taken out by the correlation rescaling; ones otherwise.
    Vector scale;

    std::size_t neighborhood_size = 0;
    std::size_t block_count = 0;
    std::size_t largest_block = 0;
    AdmmReport admm;
    int refit_sweeps = 0;

    /// precision rescaled to the covariance scale of the data: D^{-1} Omega D^{-1}.
    Matrix covariance_precision() const;
};

struct GraphPath
{
    Method method = Method::Loggle;
    std::vector<std::string> names;
    std::vector<TimeFit> fits;

    std::vector<double> times() const;
    std::vector<EdgeSet> edge_sets() const;
    bool all_ok() const;
};

/// For every fit time: window, smoothing, screening, blockwise solve, refit at the fit time.
/// Errors are recorded per time and the other times still complete.
GraphPath fit_path(const TimeSeriesDataset& data, const FitConfig& config);

/// As fit_path, but refits time k on `refit_edges[k]` instead of the penalised support.
GraphPath fit_path(const TimeSeriesDataset& data, const FitConfig& config, const std::vector<EdgeSet>& refit_edges);

}  // namespace loggle
