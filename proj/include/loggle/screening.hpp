#pragma once

#include "loggle/admm.hpp"
#include "loggle/kernel.hpp"
#include "loggle/likelihood.hpp"
#include "loggle/pseudo.hpp"
#include "loggle/types.hpp"

#include <vector>

namespace loggle {

using Adjacency = Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic>;

/// Disjoint variable groups covering 0..p-1, each sorted, ordered by smallest member.
struct BlockPartition
{
    std::vector<std::vector<Index>> blocks;

    std::size_t size() const { return blocks.size(); }
    Index dim() const;
    std::size_t largest() const;
    /// Block id of every variable.
    std::vector<std::size_t> labels() const;
};

/// A_uv = 1 iff mean_i Sigma_uv(t_i)^2 > lambda^2 (u != v). Ties count as disconnected.
Adjacency screen_adjacency(const SmoothedMatrixSequence& sigmas, double lambda);

BlockPartition connected_components(const Adjacency& adjacency);

enum class SolverKind
{
    Likelihood,
    Pseudo,
};

/// Result of a screened solve. `support` holds per-time matrices whose off-diagonal
/// zero pattern is the estimated graph: the sparse precision for the likelihood solver,
/// the regression coefficients for the pseudo solver. `dense` is only set by the likelihood solver.
struct BlockwiseFit
{
    SolverKind solver = SolverKind::Likelihood;
    std::vector<double> times;
    std::vector<Matrix> support;
    std::vector<Matrix> dense;
    BlockPartition partition;
    /// Largest iteration count over the blocks; converged only if every block converged.
    AdmmReport report;

    std::size_t size() const { return support.size(); }
    EdgeSet edges_at(std::size_t i) const { return EdgeSet::support_of(support[i]); }
    /// Pairs present at any time.
    EdgeSet shared_support() const;
    PrecisionSequence precision() const;
};

/// Screens with the disconnection bound, solves singletons in closed form
/// (Omega_uu = 1/Sigma_uu) and every larger block with the chosen ADMM solver,
/// then reassembles in the original variable order.
/// `warm` is a full-dimension state carried across calls on the same times.
BlockwiseFit solve_blockwise(const SmoothedMatrixSequence& sigmas,
                             double lambda,
                             SolverKind solver,
                             const AdmmSettings& settings,
                             AdmmState* warm = nullptr);

}  // namespace loggle
