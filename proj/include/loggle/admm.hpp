#pragma once

#include "loggle/errors.hpp"
#include "loggle/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace loggle {

/// ADMM knobs shared by the likelihood and pseudo-likelihood solvers.
struct AdmmSettings
{
    /// Augmented-Lagrangian penalty; unset means rho = lambda (1 when lambda = 0).
    std::optional<double> rho;
    /// Over-relaxation in [1,2].
    double alpha = 1.5;
    double eps_abs = 1e-5;
    double eps_rel = 1e-3;
    int max_iter = 500;
    /// Keep per-iteration residuals and objective values (diagnostics and tests only).
    bool record_trace = false;

    void validate() const;
    double rho_for(double lambda) const;
};

/// Per-iteration record, filled when AdmmSettings::record_trace is set.
struct AdmmTrace
{
    std::vector<double> primal_residual;
    std::vector<double> dual_residual;
    std::vector<double> objective;
};

/// Auxiliary and scaled dual iterates, kept between solves on the same
/// neighbourhood to warm-start along a decreasing lambda path.
struct AdmmState
{
    std::vector<Matrix> z;
    std::vector<Matrix> u;
    double rho = 0.0;

    bool matches(std::size_t times, Index dim) const
    {
        return z.size() == times && u.size() == times && !z.empty() &&
               static_cast<Index>(z.front().rows()) == dim;
    }

    /// Restriction to a variable subset, or an empty state if this one does not fit.
    AdmmState restrict_to(std::span<const Index> variables, std::size_t times, Index full_dim) const;
    /// Writes a block state back into the full-dimension state, allocating it if needed.
    void scatter(const AdmmState& block, std::span<const Index> variables, std::size_t times, Index full_dim);
};

}  // namespace loggle
