#include "loggle/errors.hpp"
#include "loggle/likelihood.hpp"
#include "loggle/pipeline.hpp"
#include "loggle/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace loggle;

namespace {

SimulationModel pd_invariant(Index p, std::uint64_t seed, std::size_t n_intervals)
{
    for (;; ++seed) {
        auto m = simulate_time_invariant(p, seed);
        try {
            m.check_positive_definite(simulation_grid(n_intervals).times());
            return m;
        } catch (const GenerationError&) {
        }
    }
}

TimeSeriesDataset sample_data(Index p, std::size_t n, std::uint64_t seed)
{
    return sample_observations(pd_invariant(p, seed, n), n);
}

AdmmSettings tight()
{
    AdmmSettings s;
    s.eps_abs = 1e-12;
    s.eps_rel = 1e-12;
    s.max_iter = 100000;
    return s;
}

}  // namespace

TEST(FitConfig, Validation)
{
    FitConfig c;
    EXPECT_NO_THROW(c.validate());
    c.lambda = {};
    EXPECT_THROW(c.validate(), ParameterError);
    c = FitConfig{};
    c.d = {-0.1};
    EXPECT_THROW(c.validate(), ParameterError);
    c = FitConfig{};
    c.fit_times = {0.2, 0.4};
    c.lambda = {0.1, 0.2, 0.3};
    EXPECT_THROW(c.validate(), ParameterError);
    c = FitConfig{};
    c.kernel.bandwidth = 0.0;
    EXPECT_THROW(c.validate(), ParameterError);
}

TEST(FitConfig, PerTimeValuesAndMethodOverrides)
{
    FitConfig c;
    c.fit_times = {0.1, 0.5};
    c.d = {0.05, 0.3};
    c.lambda = {0.2};
    EXPECT_EQ(c.d_at(1), 0.3);
    EXPECT_EQ(c.lambda_at(1), 0.2);
    c.method = Method::Kernel;
    EXPECT_EQ(c.d_at(1), 0.0);
    c.method = Method::Invar;
    EXPECT_EQ(c.d_at(0), 1.0);
}

TEST(ResolveFitTimes, DefaultsToDistinctObservationTimes)
{
    const TimeSeriesDataset d(Matrix::Zero(4, 2), TimeGrid({0.0, 0.0, 0.5, 1.0}), {});
    EXPECT_EQ(resolve_fit_times(d, {}), (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(resolve_fit_times(d, {0.7, 0.2, 0.7}), (std::vector<double>{0.2, 0.7}));
    EXPECT_THROW(resolve_fit_times(d, {1.5}), ParameterError);
}

TEST(FitPath, KernelMethodEqualsIndependentLassoSolves)
{
    const auto data = sample_data(6, 80, 1);
    FitConfig c;
    c.method = Method::Kernel;
    c.kernel.bandwidth = 0.2;
    c.lambda = {0.15};
    c.fit_times = {0.1, 0.45, 0.9};
    c.admm = tight();
    const auto path = fit_path(data, c);
    ASSERT_TRUE(path.all_ok());
    for (std::size_t k = 0; k < 3; ++k) {
        Matrix s = smoothed_covariance(data, c.fit_times[k], c.kernel);
        to_correlation(s);
        const SmoothedMatrixSequence seq{{c.fit_times[k]}, {s}};
        const auto fit = admm_likelihood(seq, 0.15, tight());
        EXPECT_EQ(path.fits[k].solver_edges, fit.precision.edges_at(0));
        EXPECT_EQ(path.fits[k].neighborhood_size, 1u);
        const auto rf = refit_mle(s, fit.precision.edges_at(0), c.refit);
        EXPECT_LE((path.fits[k].precision - rf.precision).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(FitPath, ZeroWidthLoggleEqualsSingleTimeSolve)
{
    const auto data = sample_data(5, 60, 2);
    FitConfig c;
    c.d = {0.0};
    c.lambda = {0.1};
    c.kernel.bandwidth = 0.25;
    c.fit_times = {0.3, 0.55};  // 0.55 is off-grid
    c.admm = tight();
    FitConfig k = c;
    k.method = Method::Kernel;
    const auto a = fit_path(data, c);
    const auto b = fit_path(data, k);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(a.fits[i].edges, b.fits[i].edges);
        EXPECT_LE((a.fits[i].precision - b.fits[i].precision).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(FitPath, InvarSharesOneGraph)
{
    const auto data = sample_data(8, 100, 3);
    FitConfig c;
    c.method = Method::Invar;
    c.lambda = {0.12};
    c.fit_times = {0.0, 0.25, 0.5, 0.75, 1.0, 0.333};
    const auto path = fit_path(data, c);
    ASSERT_TRUE(path.all_ok());
    for (const auto& f : path.fits) {
        EXPECT_EQ(f.edges, path.fits.front().edges);
        EXPECT_EQ(f.solver_edges, path.fits.front().solver_edges);
    }
    // a loggle window covering everything is the same fit
    FitConfig wide = c;
    wide.method = Method::Loggle;
    wide.d = {1.0};
    const auto same = fit_path(data, wide);
    for (std::size_t k = 0; k < path.fits.size(); ++k) EXPECT_EQ(same.fits[k].edges, path.fits[k].edges);
}

TEST(FitPath, EdgesAreExactRefitSupportAndPd)
{
    const auto data = sample_data(10, 120, 4);
    FitConfig c;
    c.d = {0.1};
    c.lambda = {0.2};
    const auto path = fit_path(data, c);
    ASSERT_TRUE(path.all_ok());
    EXPECT_EQ(path.fits.size(), 121u);
    for (const auto& f : path.fits) {
        EXPECT_EQ(f.edges, EdgeSet::support_of(f.precision));
        EXPECT_EQ(f.edges, f.solver_edges);
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(f.precision).eigenvalues().minCoeff(), 0.0);
    }
}

TEST(FitPath, RefitOnGivenEdges)
{
    const auto data = sample_data(6, 60, 5);
    FitConfig c;
    c.fit_times = {0.2, 0.8};
    c.lambda = {0.05};
    const std::vector<EdgeSet> edges{EdgeSet(6, {{0, 1}}), EdgeSet(6)};
    const auto path = fit_path(data, c, edges);
    EXPECT_EQ(path.fits[0].edges, edges[0]);
    EXPECT_TRUE(path.fits[1].edges.empty());
    EXPECT_THROW(fit_path(data, c, {EdgeSet(6)}), ParameterError);
}

TEST(FitPath, DeterministicAcrossRunsAndThreads)
{
    const auto data = sample_data(8, 90, 6);
    FitConfig c;
    c.d = {0.15};
    c.lambda = {0.15};
    c.threads = 1;
    const auto a = fit_path(data, c);
    const auto b = fit_path(data, c);
    c.threads = 3;
    const auto t = fit_path(data, c);
    for (std::size_t k = 0; k < a.fits.size(); ++k) {
        EXPECT_EQ(a.fits[k].precision, b.fits[k].precision);
        EXPECT_EQ(a.fits[k].precision, t.fits[k].precision);
        EXPECT_EQ(a.fits[k].admm.iterations, t.fits[k].admm.iterations);
    }
}

TEST(FitPath, OffGridSmoothingIsContinuous)
{
    const auto data = sample_data(5, 40, 7);
    const KernelSpec spec{KernelKind::Epanechnikov, 0.2};
    const double t = 0.5125;  // between grid points 0.5 and 0.525
    const Matrix mid = smoothed_covariance(data, t, spec);
    for (double step : {1e-4, 1e-6}) {
        const Matrix lo = smoothed_covariance(data, t - step, spec);
        const Matrix hi = smoothed_covariance(data, t + step, spec);
        EXPECT_LE((lo - mid).cwiseAbs().maxCoeff(), 1e3 * step);
        EXPECT_LE((hi - mid).cwiseAbs().maxCoeff(), 1e3 * step);
    }
    FitConfig c;
    c.fit_times = {t};
    c.d = {0.05};
    c.lambda = {0.1};
    const auto path = fit_path(data, c);
    ASSERT_TRUE(path.all_ok());
    EXPECT_EQ(path.fits[0].time, t);
    EXPECT_EQ(path.fits[0].neighborhood_size, 5u);  // 0.475, 0.5, t, 0.525, 0.55
}

TEST(FitPath, CorrelationScaleMatchesCovarianceRefit)
{
    const auto data = sample_data(6, 60, 8);
    FitConfig c;
    c.fit_times = {0.4};
    c.lambda = {0.1};
    const auto path = fit_path(data, c);
    ASSERT_TRUE(path.all_ok());
    const Matrix s = smoothed_covariance(data, 0.4, c.kernel);
    const auto rf = refit_mle(s, path.fits[0].edges, RefitSettings{1e-12, 100000});
    EXPECT_LE((path.fits[0].covariance_precision() - rf.precision).cwiseAbs().maxCoeff(),
              1e-6 * rf.precision.cwiseAbs().maxCoeff());
}

TEST(FitPath, HugeLambdaGivesDiagonal)
{
    const auto data = sample_data(3, 20, 9);
    FitConfig c;
    c.lambda = {100.0};
    const auto path = fit_path(data, c);
    for (const auto& f : path.fits) {
        EXPECT_TRUE(f.edges.empty());
        EXPECT_EQ(f.block_count, 3u);
    }
}

TEST(FitPath, SolverFailureIsRecordedPerTime)
{
    const auto data = sample_data(6, 30, 10);
    FitConfig c;
    c.lambda = {0.05};
    c.fit_times = {0.2, 0.6};
    c.admm.max_iter = 1;
    GraphPath path;
    ASSERT_NO_THROW(path = fit_path(data, c));
    EXPECT_FALSE(path.all_ok());
    for (const auto& f : path.fits) {
        if (!f.ok) {
            EXPECT_TRUE(f.non_converged);
            EXPECT_FALSE(f.error.empty());
        }
    }
}

TEST(FitPath, PseudoSolverPipeline)
{
    const auto data = sample_data(8, 80, 11);
    FitConfig c;
    c.solver = SolverKind::Pseudo;
    c.d = {0.1};
    c.lambda = {0.15};
    const auto path = fit_path(data, c);
    ASSERT_TRUE(path.all_ok());
    for (const auto& f : path.fits) EXPECT_EQ(f.edges, EdgeSet::support_of(f.precision));
}
