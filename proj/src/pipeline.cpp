#include "loggle/pipeline.hpp"

#include "loggle/errors.hpp"
#include "loggle/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace loggle {

void FitConfig::validate() const
{
    if (!(kernel.bandwidth > 0.0)) throw ParameterError("kernel bandwidth must be positive");
    if (d.empty() || lambda.empty()) throw ParameterError("d and lambda need at least one value");
    for (double v : d) {
        if (!(v >= 0.0)) throw ParameterError("d must be non-negative");
    }
    for (double v : lambda) {
        if (!(v > 0.0)) throw ParameterError("lambda must be positive");
    }
    for (double t : fit_times) {
        if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("fit times must lie in [0,1]");
    }
    if (!fit_times.empty() && (d.size() > 1 || lambda.size() > 1)) {
        // per-time lists align with the fit times, so those must already be in order
        if ((d.size() > 1 && d.size() != fit_times.size()) || (lambda.size() > 1 && lambda.size() != fit_times.size())) {
            throw ParameterError("per-time d/lambda lists must have one entry per fit time");
        }
        if (std::adjacent_find(fit_times.begin(), fit_times.end(), std::greater_equal<>()) != fit_times.end()) {
            throw ParameterError("fit times must be strictly increasing when d or lambda is given per time");
        }
    }
    admm.validate();
    if (!(refit.tol > 0.0) || refit.max_sweeps <= 0) throw ParameterError("invalid refit settings");
}

double FitConfig::d_at(std::size_t k) const
{
    if (method == Method::Kernel) return 0.0;
    if (method == Method::Invar) return 1.0;
    return d.size() == 1 ? d.front() : d.at(k);
}

double FitConfig::lambda_at(std::size_t k) const
{
    return lambda.size() == 1 ? lambda.front() : lambda.at(k);
}

std::vector<double> resolve_fit_times(const TimeSeriesDataset& data, const std::vector<double>& requested)
{
    std::vector<double> out = requested;
    if (out.empty()) out = data.grid().times();
    for (double t : out) {
        if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("fit times must lie in [0,1]");
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Matrix TimeFit::covariance_precision() const
{
    const Vector inv = scale.cwiseInverse();
    return inv.asDiagonal() * precision * inv.asDiagonal();
}

std::vector<double> GraphPath::times() const
{
    std::vector<double> out;
    for (const auto& f : fits) out.push_back(f.time);
    return out;
}

std::vector<EdgeSet> GraphPath::edge_sets() const
{
    std::vector<EdgeSet> out;
    for (const auto& f : fits) out.push_back(f.edges);
    return out;
}

bool GraphPath::all_ok() const
{
    return std::all_of(fits.begin(), fits.end(), [](const TimeFit& f) { return f.ok; });
}

namespace {

GraphPath run_path(const TimeSeriesDataset& data, const FitConfig& config, const std::vector<EdgeSet>* refit_edges)
{
    config.validate();
    const std::vector<double> times = resolve_fit_times(data, config.fit_times);
    const std::size_t k_count = times.size();
    if (config.d.size() != 1 && config.d.size() != k_count && config.method == Method::Loggle) {
        throw ParameterError("d must have one value or one per fit time");
    }
    if (config.lambda.size() != 1 && config.lambda.size() != k_count) {
        throw ParameterError("lambda must have one value or one per fit time");
    }
    if (refit_edges && refit_edges->size() != k_count) throw ParameterError("one refit edge set per fit time needed");

    const unsigned threads = resolve_threads(config.threads);
    PathEngine engine(data.grid().times(), times, config.method);
    std::vector<CellRequest> requests;
    for (std::size_t k = 0; k < k_count; ++k) requests.push_back({k, config.d_at(k), {config.lambda_at(k)}});
    const SmoothedCache cache(data, {}, config.kernel, config.as_correlation, engine.required_times(requests), threads);

    EngineSettings es;
    es.method = config.method;
    es.solver = config.solver;
    es.admm = config.admm;
    es.threads = threads;
    const auto outcomes = engine.run(cache, requests, es);

    GraphPath path;
    path.method = config.method;
    path.names = data.names();
    path.fits.resize(k_count);
    parallel_for(k_count, threads, [&](std::size_t k) {
        TimeFit& f = path.fits[k];
        const CellOutcome& cell = outcomes[k].front();
        f.time = times[k];
        f.d = config.d_at(k);
        f.lambda = config.lambda_at(k);
        f.neighborhood_size = cell.neighborhood_size;
        f.block_count = cell.block_count;
        f.largest_block = cell.largest_block;
        f.admm = cell.report;
        if (cell.status != CellStatus::Ok) {
            f.error = cell.error;
            f.non_converged = cell.report.iterations > 0 && !cell.report.converged;
            return;
        }
        f.solver_edges = cell.edges;
        try {
            const Matrix& sigma = cache.sigma(f.time);
            f.scale = cache.scale(f.time);
            const EdgeSet& target = refit_edges ? (*refit_edges)[k] : cell.edges;
            RefitResult rf = refit_mle(sigma, target, config.refit);
            f.precision = std::move(rf.precision);
            f.refit_sweeps = rf.sweeps;
            f.edges = EdgeSet::support_of(f.precision);
            f.ok = true;
        } catch (const NonConvergenceError& e) {
            f.error = e.what();
            f.non_converged = true;
        } catch (const Error& e) {
            f.error = e.what();
        }
    });
    return path;
}

}  // namespace

GraphPath fit_path(const TimeSeriesDataset& data, const FitConfig& config)
{
    return run_path(data, config, nullptr);
}

GraphPath fit_path(const TimeSeriesDataset& data, const FitConfig& config, const std::vector<EdgeSet>& refit_edges)
{
    return run_path(data, config, &refit_edges);
}

}  // namespace loggle
