#include "loggle/tuning.hpp"

#include "loggle/errors.hpp"
#include "loggle/parallel.hpp"
#include "loggle/refit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

namespace loggle {

std::vector<Fold> make_folds(std::size_t n, std::size_t v)
{
    if (v < 2) throw ParameterError("cross-validation needs at least two folds");
    if (n < v) throw ParameterError("fewer observations than folds");
    std::vector<Fold> folds(v);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < v; ++f) {
            (i % v == f ? folds[f].validation : folds[f].training).push_back(i);
        }
    }
    return folds;
}

double validation_bandwidth(double h, std::size_t v)
{
    if (v < 2) throw ParameterError("cross-validation needs at least two folds");
    return h * std::pow(static_cast<double>(v - 1), 0.2);
}

double cv_score(const Matrix& precision, const Matrix& validation_sigma)
{
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return precision.cwiseProduct(validation_sigma).sum() - logdet;
}

EdgeSet cv_vote(const std::vector<EdgeSet>& fold_edges, double threshold)
{
    if (fold_edges.empty()) throw ParameterError("cv_vote needs at least one edge set");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ParameterError("vote threshold must lie in [0,1]");
    const auto v = static_cast<double>(fold_edges.size());
    const auto need = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(threshold * v - 1e-9)));
    std::map<Edge, std::size_t> counts;
    for (const auto& es : fold_edges) {
        for (const auto& e : es) ++counts[e];
    }
    std::vector<Edge> kept;
    for (const auto& [e, c] : counts) {
        if (c >= need) kept.push_back(e);
    }
    return EdgeSet(fold_edges.front().dim(), std::move(kept));
}

void TuningGrid::validate() const
{
    if (h.empty() || d.empty() || lambda.empty()) throw ParameterError("tuning grids must be non-empty");
    for (double x : h) {
        if (!(x > 0.0)) throw ParameterError("bandwidths must be positive");
    }
    for (double x : d) {
        if (!(x >= 0.0)) throw ParameterError("window widths must be non-negative");
    }
    for (double x : lambda) {
        if (!(x > 0.0)) throw ParameterError("lambda values must be positive");
    }
    if (folds < 2) throw ParameterError("cross-validation needs at least two folds");
    if (!(vote_threshold >= 0.0 && vote_threshold <= 1.0)) throw ParameterError("vote threshold must lie in [0,1]");
    if (!(edge_cap_multiplier > 0.0)) throw ParameterError("edge cap multiplier must be positive");
    if (coarse_stride == 0) throw ParameterError("coarse stride must be positive");
}

SearchPlan grid_search_schedule(const TuningGrid& grid)
{
    SearchPlan plan;
    plan.d = grid.d;
    plan.lambda = grid.lambda;
    std::sort(plan.lambda.begin(), plan.lambda.end(), std::greater<>());
    plan.lambda.erase(std::unique(plan.lambda.begin(), plan.lambda.end()), plan.lambda.end());
    plan.coarse = grid.coarse_keep > 0 && grid.coarse_keep < grid.h.size();
    if (plan.coarse) {
        plan.keep = grid.coarse_keep;
        for (std::size_t i = 0; i < plan.d.size(); i += grid.coarse_stride) plan.coarse_d.push_back(plan.d[i]);
        for (std::size_t i = 0; i < plan.lambda.size(); i += grid.coarse_stride) {
            plan.coarse_lambda.push_back(plan.lambda[i]);
        }
    }
    return plan;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Evaluation
{
    std::vector<double> d;
    std::vector<double> lambda;
    // [k][d][lambda]
    std::vector<std::vector<std::vector<double>>> total;
    // [k][d][lambda][fold]
    std::vector<std::vector<std::vector<std::vector<EdgeSet>>>> edges;
    std::vector<CvRecord> records;
};

struct Context
{
    const TimeSeriesDataset& data;
    const TuningGrid& grid;
    const FitConfig& base;
    std::vector<double> fit_times;
    std::vector<Fold> folds;
    unsigned threads;
};

Evaluation evaluate(const Context& ctx, double h, std::vector<double> d_values, std::vector<double> lambdas, bool coarse)
{
    const std::size_t K = ctx.fit_times.size();
    const std::size_t V = ctx.folds.size();
    const Method method = ctx.base.method;
    if (method == Method::Kernel) d_values = {0.0};
    if (method == Method::Invar) d_values = {1.0};
    const std::size_t D = d_values.size();
    const std::size_t L = lambdas.size();
    const auto p = ctx.data.cols();

    Evaluation ev;
    ev.d = d_values;
    ev.lambda = lambdas;
    ev.total.assign(K, std::vector<std::vector<double>>(D, std::vector<double>(L, 0.0)));
    ev.edges.assign(K, std::vector<std::vector<std::vector<EdgeSet>>>(
                           D, std::vector<std::vector<EdgeSet>>(L, std::vector<EdgeSet>(V, EdgeSet(p)))));
    // per fold scores and statuses: [k][d][l][v]
    std::vector<std::vector<std::vector<std::vector<double>>>> scores(
        K, std::vector<std::vector<std::vector<double>>>(D, std::vector<std::vector<double>>(L, std::vector<double>(V))));
    std::vector<std::vector<std::vector<std::vector<CellStatus>>>> status(
        K, std::vector<std::vector<std::vector<CellStatus>>>(
               D, std::vector<std::vector<CellStatus>>(L, std::vector<CellStatus>(V, CellStatus::Skipped))));

    const KernelSpec train_kernel{ctx.base.kernel.kind, h};
    const KernelSpec val_kernel{ctx.base.kernel.kind, validation_bandwidth(h, V)};
    EngineSettings es;
    es.method = method;
    es.solver = ctx.base.solver;
    es.admm = ctx.base.admm;
    es.threads = ctx.threads;
    es.edge_cap = static_cast<std::size_t>(std::floor(ctx.grid.edge_cap_multiplier * static_cast<double>(p)));

    const auto& all_times = ctx.data.grid().times();
    for (std::size_t v = 0; v < V; ++v) {
        const Fold& fold = ctx.folds[v];
        std::vector<double> train_times;
        for (Index r : fold.training) train_times.push_back(all_times[r]);
        PathEngine engine(train_times, ctx.fit_times, method);
        std::vector<CellRequest> requests;
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t di = 0; di < D; ++di) requests.push_back({k, d_values[di], lambdas});
        }
        const SmoothedCache cache(ctx.data, fold.training, train_kernel, ctx.base.as_correlation,
                                  engine.required_times(requests), ctx.threads);
        const auto outcomes = engine.run(cache, requests, es);

        parallel_for(K, ctx.threads, [&](std::size_t k) {
            const double t = ctx.fit_times[k];
            std::optional<Matrix> val_sigma;
            try {
                Matrix s = smoothed_covariance(ctx.data, t, val_kernel, fold.validation);
                if (ctx.base.as_correlation) to_correlation(s, &ctx.data.names());
                val_sigma = std::move(s);
            } catch (const EmptyWindowError&) {
            } catch (const DegenerateVariableError&) {
            }
            std::map<std::vector<Edge>, double> memo;
            for (std::size_t di = 0; di < D; ++di) {
                for (std::size_t l = 0; l < L; ++l) {
                    const CellOutcome& cell = outcomes[k * D + di][l];
                    status[k][di][l][v] = cell.status;
                    if (cell.status == CellStatus::Skipped) continue;
                    if (cell.status == CellStatus::Failed) {
                        scores[k][di][l][v] = kInf;
                        continue;
                    }
                    ev.edges[k][di][l][v] = cell.edges;
                    if (!val_sigma) {
                        scores[k][di][l][v] = std::numeric_limits<double>::quiet_NaN();
                        continue;
                    }
                    auto [it, inserted] = memo.try_emplace(cell.edges.edges(), kInf);
                    if (inserted) {
                        try {
                            const RefitResult rf = refit_mle(cache.sigma(t), cell.edges, ctx.base.refit);
                            it->second = cv_score(rf.precision, *val_sigma);
                        } catch (const Error&) {
                            it->second = kInf;
                        }
                    }
                    scores[k][di][l][v] = it->second;
                }
            }
        });
    }

    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t di = 0; di < D; ++di) {
            for (std::size_t l = 0; l < L; ++l) {
                double sum = 0.0;
                bool any = false;
                for (std::size_t v = 0; v < V; ++v) {
                    const CellStatus st = status[k][di][l][v];
                    const double s = scores[k][di][l][v];
                    if (st != CellStatus::Skipped) {
                        ev.records.push_back({k, ctx.fit_times[k], h, d_values[di], lambdas[l], v, s,
                                              ev.edges[k][di][l][v].size(), coarse});
                    }
                    if (st != CellStatus::Ok) {
                        sum = kInf;
                    } else if (!std::isnan(s)) {
                        sum += s;
                        any = true;
                    }
                }
                ev.total[k][di][l] = (any || std::isinf(sum)) ? sum : kInf;
            }
        }
    }
    return ev;
}

// Tie-break: larger lambda, then larger d.
bool better(double score, double lambda, double d, const TimeSelection& best)
{
    if (score != best.score) return score < best.score;
    if (lambda != best.lambda) return lambda > best.lambda;
    return d > best.d;
}

std::vector<TimeSelection> select_cells(const Evaluation& ev, Method method)
{
    const std::size_t K = ev.total.size();
    std::vector<TimeSelection> out(K);
    if (method == Method::Invar) {
        TimeSelection best{ev.d.front(), ev.lambda.front(), kInf};
        std::size_t best_l = 0;
        for (std::size_t l = 0; l < ev.lambda.size(); ++l) {
            double sum = 0.0;
            for (std::size_t k = 0; k < K; ++k) sum += ev.total[k][0][l];
            if (l == 0 || better(sum, ev.lambda[l], ev.d.front(), best)) {
                best = {ev.d.front(), ev.lambda[l], sum};
                best_l = l;
            }
        }
        for (std::size_t k = 0; k < K; ++k) out[k] = {ev.d.front(), ev.lambda[best_l], ev.total[k][0][best_l]};
        return out;
    }
    for (std::size_t k = 0; k < K; ++k) {
        TimeSelection best{ev.d.front(), ev.lambda.front(), kInf};
        bool first = true;
        for (std::size_t di = 0; di < ev.d.size(); ++di) {
            for (std::size_t l = 0; l < ev.lambda.size(); ++l) {
                const double s = ev.total[k][di][l];
                if (first || better(s, ev.lambda[l], ev.d[di], best)) best = {ev.d[di], ev.lambda[l], s};
                first = false;
            }
        }
        out[k] = best;
    }
    return out;
}

double sum_scores(const std::vector<TimeSelection>& sel)
{
    double s = 0.0;
    for (const auto& x : sel) s += x.score;
    return s;
}

std::size_t index_of(const std::vector<double>& values, double x)
{
    return static_cast<std::size_t>(std::find(values.begin(), values.end(), x) - values.begin());
}

}  // namespace

CvResult select_parameters(const TimeSeriesDataset& data, const TuningGrid& grid, const FitConfig& base)
{
    grid.validate();
    base.validate();
    const Context ctx{data, grid, base, resolve_fit_times(data, base.fit_times), make_folds(data.rows(), grid.folds),
                      resolve_threads(base.threads)};
    const SearchPlan plan = grid_search_schedule(grid);
    const std::size_t H = grid.h.size();

    CvResult res;
    res.method = base.method;
    res.fit_times = ctx.fit_times;
    res.grid = grid;
    res.h_scores.assign(H, kInf);
    res.h_refined.assign(H, !plan.coarse);
    res.per_h.resize(H);

    std::vector<std::size_t> refine;
    if (plan.coarse) {
        std::vector<Evaluation> coarse(H);
        for (std::size_t i = 0; i < H; ++i) {
            coarse[i] = evaluate(ctx, grid.h[i], plan.coarse_d, plan.coarse_lambda, true);
            res.per_h[i] = select_cells(coarse[i], base.method);
            res.h_scores[i] = sum_scores(res.per_h[i]);
        }
        std::vector<std::size_t> order(H);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return res.h_scores[a] < res.h_scores[b]; });
        refine.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(plan.keep));
        std::sort(refine.begin(), refine.end());
        for (std::size_t i = 0; i < H; ++i) {
            if (!std::binary_search(refine.begin(), refine.end(), i)) {
                res.records.insert(res.records.end(), coarse[i].records.begin(), coarse[i].records.end());
            }
        }
    } else {
        refine.resize(H);
        std::iota(refine.begin(), refine.end(), 0);
    }

    std::vector<Evaluation> fine(H);
    for (std::size_t i : refine) {
        fine[i] = evaluate(ctx, grid.h[i], plan.d, plan.lambda, false);
        res.per_h[i] = select_cells(fine[i], base.method);
        res.h_scores[i] = sum_scores(res.per_h[i]);
        res.h_refined[i] = true;
        res.records.insert(res.records.end(), fine[i].records.begin(), fine[i].records.end());
    }

    std::size_t best = refine.front();
    for (std::size_t i : refine) {
        if (res.h_scores[i] < res.h_scores[best]) best = i;
    }
    res.selected_h_index = best;
    res.selected_h = grid.h[best];
    res.selected = res.per_h[best];

    const Evaluation& ev = fine[best];
    for (std::size_t k = 0; k < ctx.fit_times.size(); ++k) {
        const std::size_t di = index_of(ev.d, res.selected[k].d);
        const std::size_t l = index_of(ev.lambda, res.selected[k].lambda);
        res.fold_edges.push_back(ev.edges[k][di][l]);
        res.voted.push_back(cv_vote(ev.edges[k][di][l], grid.vote_threshold));
    }
    return res;
}

TunedFit fit_with_tuning(const TimeSeriesDataset& data, const TuningGrid& grid, const FitConfig& base)
{
    TunedFit out;
    out.cv = select_parameters(data, grid, base);
    FitConfig config = base;
    config.kernel.bandwidth = out.cv.selected_h;
    config.fit_times = out.cv.fit_times;
    config.d.clear();
    config.lambda.clear();
    for (const auto& s : out.cv.selected) {
        config.d.push_back(s.d);
        config.lambda.push_back(s.lambda);
    }
    out.path = grid.refit_on_vote ? fit_path(data, config, out.cv.voted) : fit_path(data, config);
    return out;
}

}  // namespace loggle
