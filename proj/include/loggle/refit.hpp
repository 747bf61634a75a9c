#pragma once

#include "loggle/types.hpp"

namespace loggle {

struct RefitSettings
{
    /// Stationarity tolerance on max |(Omega^{-1})_uv - Sigma_uv| over free entries.
    double tol = 1e-8;
    int max_sweeps = 5000;
};

struct RefitResult
{
    Matrix precision;
    int sweeps = 0;
    double violation = 0.0;
};

/// Maximises log|Omega| - tr(Omega Sigma) subject to Omega_uv = 0 for {u,v} not in `edges`.
/// Iterative proportional scaling over the edge cliques, run separately on every connected
/// component of the edge graph; complete components are inverted directly.
/// Throws InfeasibleError when a required submatrix of Sigma is not positive definite,
/// NonConvergenceError when max_sweeps is exhausted.
RefitResult refit_mle(const Matrix& sigma, const EdgeSet& edges, const RefitSettings& settings = {});

/// Largest violation of the matching conditions on the diagonal and on `edges`.
double refit_stationarity(const Matrix& precision, const Matrix& sigma, const EdgeSet& edges);

}  // namespace loggle
