#pragma once

#include "loggle/dataset.hpp"
#include "loggle/engine.hpp"
#include "loggle/pipeline.hpp"
#include "loggle/types.hpp"

#include <limits>
#include <vector>

namespace loggle {

struct Fold
{
    std::vector<Index> validation;
    std::vector<Index> training;
};

/// Interleaved folds: fold v validates rows v, v+V, v+2V, ... (0-based here).
std::vector<Fold> make_folds(std::size_t n, std::size_t v);

/// Validation-side bandwidth h (V-1)^{1/5}, accounting for the smaller validation sample.
double validation_bandwidth(double h, std::size_t v);

/// tr(Omega Sigma_val) - log|Omega|; +inf if Omega is not positive definite.
double cv_score(const Matrix& precision, const Matrix& validation_sigma);

/// Keeps pairs present in at least ceil(threshold * V) of the fold edge sets.
EdgeSet cv_vote(const std::vector<EdgeSet>& fold_edges, double threshold);

struct TuningGrid
{
    std::vector<double> h = {0.1, 0.15, 0.2, 0.25, 0.3};
    std::vector<double> d = {0.0, 0.001, 0.01, 0.025, 0.05, 0.075, 0.1, 0.15, 0.2, 0.25, 0.3, 1.0};
    std::vector<double> lambda = {0.15, 0.17, 0.19, 0.21, 0.23, 0.25, 0.27, 0.29, 0.31, 0.33, 0.35};
    std::size_t folds = 5;
    double vote_threshold = 0.8;
    double edge_cap_multiplier = 5.0;
    /// Keep this many bandwidths after a coarse pass over every coarse_stride-th d and lambda.
    /// 0 (or >= |h|) evaluates the full grid for every bandwidth.
    std::size_t coarse_keep = 0;
    std::size_t coarse_stride = 2;
    /// Refit the final model on the vote-filtered edges (true) or on the full-data fit's edges.
    bool refit_on_vote = true;

    void validate() const;
};

/// Evaluation plan: lambda in decreasing order, d as given, and the optional coarse pass.
struct SearchPlan
{
    bool coarse = false;
    std::size_t keep = 0;
    std::vector<double> coarse_d;
    std::vector<double> coarse_lambda;
    std::vector<double> d;
    std::vector<double> lambda;
};

SearchPlan grid_search_schedule(const TuningGrid& grid);

struct CvRecord
{
    std::size_t time_index = 0;
    double time = 0.0;
    double h = 0.0;
    double d = 0.0;
    double lambda = 0.0;
    std::size_t fold = 0;
    /// +inf for failed fits, NaN when the fold has no validation mass near the time.
    double score = 0.0;
    std::size_t edges = 0;
    bool coarse = false;
};

struct TimeSelection
{
    double d = 0.0;
    double lambda = 0.0;
    double score = std::numeric_limits<double>::infinity();
};

struct CvResult
{
    Method method = Method::Loggle;
    std::vector<double> fit_times;
    TuningGrid grid;
    /// Every evaluated cell (early-stopped cells are not listed).
    std::vector<CvRecord> records;
    /// Summed CV score at the per-time optimum, for every bandwidth (coarse score for dropped ones).
    std::vector<double> h_scores;
    /// Bandwidths that went through the full search.
    std::vector<bool> h_refined;
    /// [h][k] best (d, lambda) per fit time.
    std::vector<std::vector<TimeSelection>> per_h;
    std::size_t selected_h_index = 0;
    double selected_h = 0.0;
    std::vector<TimeSelection> selected;
    /// [k][fold] edges of the selected cell.
    std::vector<std::vector<EdgeSet>> fold_edges;
    /// [k] vote-filtered edges of the selected cell.
    std::vector<EdgeSet> voted;
};

/// Cross-validated choice of (h, d_k, lambda_k). `base` supplies the method, solver, kernel shape,
/// ADMM/refit settings, correlation flag, fit times and threads. Loggle picks (d, lambda) per time,
/// kernel (d = 0) picks lambda per time, invar picks one lambda so every time keeps the same graph.
CvResult select_parameters(const TimeSeriesDataset& data, const TuningGrid& grid, const FitConfig& base);

struct TunedFit
{
    GraphPath path;
    CvResult cv;
};

/// select_parameters, then a full-data fit at the selection refit on the vote-filtered edges.
TunedFit fit_with_tuning(const TimeSeriesDataset& data, const TuningGrid& grid, const FitConfig& base);

}  // namespace loggle
