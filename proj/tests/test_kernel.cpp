#include "loggle/errors.hpp"
#include "loggle/kernel.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace loggle;

namespace {

TimeSeriesDataset gaussian_data(int n, int p, unsigned seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    Matrix m(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) m(i, j) = z(gen);
    }
    return TimeSeriesDataset(m, TimeGrid::uniform(static_cast<std::size_t>(n)), {});
}

}  // namespace

TEST(KernelWeights, SinglePoint)
{
    const std::vector<double> t{0.3};
    EXPECT_EQ(kernel_weights(0.3, t, {KernelKind::Epanechnikov, 0.1})[0], 1.0);
}

TEST(KernelWeights, ThreePointEpanechnikov)
{
    const std::vector<double> t{0.0, 0.5, 1.0};
    const Vector w = kernel_weights(0.5, t, {KernelKind::Epanechnikov, 0.6});
    EXPECT_NEAR(w[0], 11.0 / 58.0, 1e-15);
    EXPECT_NEAR(w[1], 36.0 / 58.0, 1e-15);
    EXPECT_NEAR(w[2], 11.0 / 58.0, 1e-15);
}

TEST(KernelWeights, CompactSupportAndNormalisation)
{
    const auto grid = TimeGrid::uniform(101).times();
    for (double t : {0.0, 0.13, 0.5, 0.999, 1.0}) {
        const Vector w = kernel_weights(t, grid, {KernelKind::Epanechnikov, 0.1});
        EXPECT_NEAR(w.sum(), 1.0, 1e-12);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double wj = w[static_cast<Eigen::Index>(j)];
            EXPECT_GE(wj, 0.0);
            if (std::abs(grid[j] - t) >= 0.1 + 1e-12) EXPECT_EQ(wj, 0.0);
        }
    }
    const Vector g = kernel_weights(0.5, grid, {KernelKind::Gaussian, 0.1});
    EXPECT_NEAR(g.sum(), 1.0, 1e-12);
    EXPECT_GT(g.minCoeff(), 0.0);
}

TEST(KernelWeights, EmptyWindowReportsTimeAndBandwidth)
{
    const std::vector<double> t{0.0, 1.0};
    try {
        kernel_weights(0.5, t, {KernelKind::Epanechnikov, 0.2});
        FAIL();
    } catch (const EmptyWindowError& e) {
        EXPECT_EQ(e.time(), 0.5);
        EXPECT_EQ(e.bandwidth(), 0.2);
    }
    EXPECT_THROW(kernel_weights(0.5, t, {KernelKind::Epanechnikov, 0.0}), ParameterError);
}

TEST(Neighborhood, MembersAndCentre)
{
    const std::vector<double> t{0.0, 0.1, 0.2, 0.3, 0.4};
    auto n = make_neighborhood(0.2, 0.1, t);
    EXPECT_EQ(n.member_times, (std::vector<double>{0.1, 0.2, 0.3}));
    n = make_neighborhood(0.2, 0.0, t);
    EXPECT_EQ(n.member_times, std::vector<double>{0.2});
    n = make_neighborhood(0.25, 0.02, t);
    EXPECT_EQ(n.member_times, std::vector<double>{0.25});
    n = make_neighborhood(0.25, 0.05, t);
    EXPECT_EQ(n.member_times, (std::vector<double>{0.2, 0.25, 0.3}));
    EXPECT_THROW(make_neighborhood(0.2, -1.0, t), ParameterError);
}

TEST(SmoothedCovariance, HandExamples)
{
    Matrix x(2, 2);
    x << 1.0, 0.0, 1.0, 1.0;
    const TimeSeriesDataset d(x, TimeGrid({0.4, 0.6}), {});
    // both points equidistant from 0.5: equal weights
    const Matrix s = smoothed_covariance(d, 0.5, {KernelKind::Epanechnikov, 0.5});
    Matrix expected(2, 2);
    expected << 1.0, 0.5, 0.5, 0.5;
    EXPECT_LE((s - expected).cwiseAbs().maxCoeff(), 1e-15);

    // only the first point in range: x1 x1^T
    const Matrix one = smoothed_covariance(d, 0.4, {KernelKind::Epanechnikov, 0.15});
    EXPECT_EQ(one, x.row(0).transpose() * x.row(0));
}

TEST(SmoothedCovariance, RowMaskRestrictsObservations)
{
    const auto d = gaussian_data(10, 3, 2);
    const std::vector<Index> rows{1, 4, 7};
    const Matrix s = smoothed_covariance(d, 0.5, {KernelKind::Gaussian, 0.2}, rows);
    const std::vector<double> t{d.grid()[1], d.grid()[4], d.grid()[7]};
    const Vector w = kernel_weights(0.5, t, {KernelKind::Gaussian, 0.2});
    Matrix ref = Matrix::Zero(3, 3);
    for (int j = 0; j < 3; ++j) ref += w[j] * d.values().row(rows[j]).transpose() * d.values().row(rows[j]);
    EXPECT_LE((s - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SmoothedCovariances, PsdSymmetricAndCorrelation)
{
    const auto d = gaussian_data(60, 8, 5);
    const auto nbhd = make_neighborhood(0.5, 0.2, d.grid().times());
    for (bool corr : {false, true}) {
        const auto seq = smoothed_covariances(d, nbhd, {KernelKind::Epanechnikov, 0.1}, corr);
        ASSERT_EQ(seq.size(), nbhd.member_times.size());
        for (const auto& m : seq.matrices) {
            EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff(), -1e-10);
            if (corr) EXPECT_LE((m.diagonal().array() - 1.0).abs().maxCoeff(), 1e-12);
        }
    }
}

TEST(SmoothedCovariances, ZeroVarianceUnderCorrelation)
{
    Matrix x = Matrix::Zero(3, 2);
    x.col(0) << 1.0, -1.0, 2.0;
    const TimeSeriesDataset d(x, TimeGrid::uniform(3), {"a", "dead"});
    const auto nbhd = make_neighborhood(0.5, 0.0, d.grid().times());
    try {
        smoothed_covariances(d, nbhd, {KernelKind::Epanechnikov, 0.6}, true);
        FAIL();
    } catch (const DegenerateVariableError& e) {
        EXPECT_EQ(e.variable(), "dead");
    }
    EXPECT_NO_THROW(smoothed_covariances(d, nbhd, {KernelKind::Epanechnikov, 0.6}, false));
}
