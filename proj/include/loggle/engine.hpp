#pragma once

#include "loggle/admm.hpp"
#include "loggle/dataset.hpp"
#include "loggle/kernel.hpp"
#include "loggle/screening.hpp"
#include "loggle/types.hpp"

#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace loggle {

enum class Method
{
    Loggle,  // local group penalty over a width-d window
    Kernel,  // d = 0: independent per-time lasso fits
    Invar,   // one window spanning every time: shared graph
};

const char* method_name(Method m);
Method parse_method(const std::string& s);

/// Smoothed covariances (or correlations) of one data subset at a fixed set of times,
/// computed up front and then shared read-only.
class SmoothedCache
{
public:
    SmoothedCache(const TimeSeriesDataset& data,
                  std::span<const Index> rows,
                  const KernelSpec& kernel,
                  bool as_correlation,
                  std::vector<double> times,
                  unsigned threads = 1);

    /// Rethrows the smoothing error (e.g. EmptyWindowError) recorded for t.
    const Matrix& sigma(double t) const;
    /// Standard deviations removed by the correlation rescaling (ones for covariances).
    const Vector& scale(double t) const;
    SmoothedMatrixSequence sequence(std::span<const double> times) const;

private:
    std::size_t index(double t) const;

    std::vector<double> times_;
    std::vector<Matrix> sigmas_;
    std::vector<Vector> scales_;
    std::vector<std::exception_ptr> errors_;
};

/// One fit time and window width evaluated along a decreasing list of lambdas.
struct CellRequest
{
    std::size_t time_index = 0;
    double d = 0.0;
    std::vector<double> lambdas;
};

enum class CellStatus
{
    Ok,
    Failed,   // solver or smoothing error
    Skipped,  // early stop: a larger lambda already exceeded the edge cap
};

struct CellOutcome
{
    CellStatus status = CellStatus::Skipped;
    EdgeSet edges;
    AdmmReport report;
    std::size_t neighborhood_size = 0;
    std::size_t block_count = 0;
    std::size_t largest_block = 0;
    std::string error;
};

struct EngineSettings
{
    Method method = Method::Loggle;
    SolverKind solver = SolverKind::Likelihood;
    AdmmSettings admm;
    /// Stop a (time, d) lambda path once a fit has more edges than this.
    std::optional<std::size_t> edge_cap;
    unsigned threads = 1;
};

/// Neighbourhood construction and lambda-path solving for a set of fit times over
/// a set of observation times (the training rows of one fold, or all rows).
/// Requests whose windows hold the same times share one warm-started solve per lambda.
class PathEngine
{
public:
    PathEngine(std::vector<double> observation_times, std::vector<double> fit_times, Method method);

    const std::vector<double>& fit_times() const { return fit_times_; }

    /// Window of fit time k: observation times within d, plus the fit time itself.
    /// Invar (and any width covering every observation) uses all observation and fit times.
    Neighborhood neighborhood(std::size_t k, double d) const;

    /// Every time at which the requests need a smoothed matrix.
    std::vector<double> required_times(const std::vector<CellRequest>& requests) const;

    /// outcome[r][l] for request r and its l-th lambda.
    std::vector<std::vector<CellOutcome>> run(const SmoothedCache& cache,
                                              const std::vector<CellRequest>& requests,
                                              const EngineSettings& settings) const;

private:
    std::vector<double> observation_times_;
    std::vector<double> fit_times_;
    std::vector<double> shared_times_;
    Method method_;
};

}  // namespace loggle
