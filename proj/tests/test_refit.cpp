#include "loggle/errors.hpp"
#include "loggle/likelihood.hpp"
#include "loggle/refit.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace loggle;

namespace {

EdgeSet complete(Index p)
{
    EdgeSet e(p);
    for (Index u = 0; u < p; ++u) {
        for (Index v = u + 1; v < p; ++v) e.insert(u, v);
    }
    return e;
}

double loglik(const Matrix& omega, const Matrix& sigma)
{
    return std::log(omega.determinant()) - (omega * sigma).trace();
}

}  // namespace

TEST(Refit, FullEdgeSetIsInverse)
{
    const Matrix s = oracle::random_sequence(6, 1, 1).matrices[0];
    const auto r = refit_mle(s, complete(6));
    EXPECT_LE((r.precision - s.inverse()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Refit, EmptyEdgeSetIsInverseDiagonal)
{
    const Matrix s = oracle::random_sequence(4, 1, 2).matrices[0];
    const auto r = refit_mle(s, EdgeSet(4));
    for (int u = 0; u < 4; ++u) {
        for (int v = 0; v < 4; ++v) EXPECT_EQ(r.precision(u, v), u == v ? 1.0 / s(u, u) : 0.0);
    }
}

TEST(Refit, ChainModelRecoveredFromExactCovariance)
{
    Matrix omega(3, 3);
    omega << 2.0, -0.8, 0.0, -0.8, 2.5, 0.6, 0.0, 0.6, 1.5;
    const Matrix sigma = omega.inverse();
    EdgeSet chain(3, {{0, 1}, {1, 2}});
    const auto r = refit_mle(sigma, chain);
    EXPECT_LE((r.precision - omega).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(r.precision(0, 2), 0.0);
}

TEST(Refit, StationarityAndStructuralZeros)
{
    const Matrix s = oracle::random_sequence(7, 1, 3).matrices[0];
    EdgeSet e(7, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {1, 5}});
    const auto r = refit_mle(s, e, RefitSettings{1e-10, 100000});
    EXPECT_LE(refit_stationarity(r.precision, s, e), 1e-9);
    for (Index u = 0; u < 7; ++u) {
        for (Index v = u + 1; v < 7; ++v) {
            if (!e.contains(u, v)) EXPECT_EQ(r.precision(u, v), 0.0);
        }
    }
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(r.precision).eigenvalues().minCoeff(), 0.0);
}

TEST(Refit, UndoesShrinkage)
{
    const auto seq = oracle::random_sequence(6, 1, 4);
    const auto fit = admm_likelihood(seq, 0.1, AdmmSettings{});
    const EdgeSet support = fit.precision.edges_at(0);
    const auto r = refit_mle(seq.matrices[0], support);
    EXPECT_GE(loglik(r.precision, seq.matrices[0]), loglik(fit.precision.dense[0], seq.matrices[0]));
}

TEST(Refit, InfeasibleWhenEdgeBlockSingular)
{
    Matrix s(3, 3);
    s << 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0;
    EXPECT_THROW(refit_mle(s, EdgeSet(3, {{0, 1}})), InfeasibleError);
    Matrix z = Matrix::Identity(2, 2);
    z(1, 1) = 0.0;
    EXPECT_THROW(refit_mle(z, EdgeSet(2)), InfeasibleError);
}

TEST(Refit, CycleNeedsIteration)
{
    // 4-cycle is not decomposable: IPS must iterate; check matching conditions
    const Matrix s = oracle::random_sequence(4, 1, 9).matrices[0];
    EdgeSet cycle(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    const auto r = refit_mle(s, cycle);
    EXPECT_GT(r.sweeps, 1);
    EXPECT_LE(refit_stationarity(r.precision, s, cycle), 1e-8);
}
