#pragma once

#include "loggle/admm.hpp"
#include "loggle/kernel.hpp"
#include "loggle/types.hpp"

#include <vector>

namespace loggle {

/// Precision matrices over a neighbourhood. `matrices` carries the sparse
/// estimate (exact zeros); `dense` keeps the positive-definite primal iterate.
struct PrecisionSequence
{
    std::vector<double> times;
    std::vector<Matrix> matrices;
    std::vector<Matrix> dense;

    std::size_t size() const { return matrices.size(); }
    Index dim() const { return matrices.empty() ? 0 : static_cast<Index>(matrices.front().rows()); }

    EdgeSet edges_at(std::size_t i) const { return EdgeSet::support_of(matrices[i]); }
    /// Pairs with a nonzero entry at any time.
    EdgeSet shared_support() const;
};

struct LikelihoodFit
{
    PrecisionSequence precision;
    AdmmReport report;
    AdmmTrace trace;
};

/// Solves X^{-1} - rho X = M for symmetric M through its eigen-decomposition.
Matrix eigen_prox(const Matrix& m, double rho);

/// Group soft-threshold across times: diagonals pass through, each off-diagonal
/// entry group {V_uv(t_i)}_i is scaled by (1 - lambda / (rho ||group||))_+.
std::vector<Matrix> group_soft_threshold(const std::vector<Matrix>& values, double lambda, double rho);

/// Locally weighted negative log-likelihood with the local group-lasso penalty:
/// |N|^{-1/2} sum_i [tr(Omega_i Sigma_i) - log|Omega_i|] + lambda sum_{u!=v} ||Omega_uv(.)||_2.
/// Returns +inf if some Omega_i is not positive definite.
double likelihood_objective(const std::vector<Matrix>& omegas, const SmoothedMatrixSequence& sigmas, double lambda);

/// ADMM minimiser of likelihood_objective. `warm` (optional) seeds Z and U and receives the final iterates.
/// Throws NonConvergenceError when max_iter is reached.
LikelihoodFit admm_likelihood(const SmoothedMatrixSequence& sigmas,
                              double lambda,
                              const AdmmSettings& settings,
                              AdmmState* warm = nullptr);

/// Largest violation of the optimality conditions
/// |N|^{-1/2}(Sigma_i - Omega_i^{-1}) + lambda Gamma_i = 0 with Gamma a group subgradient.
double kkt_residual(const PrecisionSequence& solution, const SmoothedMatrixSequence& sigmas, double lambda);

}  // namespace loggle
