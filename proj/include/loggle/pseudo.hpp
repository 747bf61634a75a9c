#pragma once

#include "loggle/admm.hpp"
#include "loggle/kernel.hpp"
#include "loggle/types.hpp"

#include <vector>

namespace loggle {

/// Cholesky factor of A_{(-j,-j)} from the upper factor U of A (A = U^T U):
/// column j is dropped and Givens rotations restore the triangle.
Matrix cholesky_delete(const Matrix& upper, Index j);

/// Factors of every leave-one-out principal submatrix of an SPD matrix,
/// built from a single Cholesky factorisation plus one deletion per index.
class LeaveOneOutCholesky
{
public:
    /// With `cache` off the deletions are recomputed at every solve, which keeps memory at O(p^2).
    explicit LeaveOneOutCholesky(const Matrix& a, bool cache = true);

    Index dim() const { return static_cast<Index>(upper_.rows()); }
    const Matrix& upper() const { return upper_; }
    /// Solves A_{(-u,-u)} x = rhs.
    Vector solve(Index u, const Vector& rhs) const;

private:
    Matrix upper_;
    std::vector<Matrix> deleted_;
};

/// Neighbourhood-selection coefficients: beta[i](u,v) is the weight of variable v
/// in the regression of u at time i. Diagonals are zero.
struct RegressionCoefficients
{
    std::vector<double> times;
    std::vector<Matrix> beta;

    std::size_t size() const { return beta.size(); }
    Index dim() const { return beta.empty() ? 0 : static_cast<Index>(beta.front().rows()); }
    /// {u,v} with beta_uv or beta_vu nonzero.
    EdgeSet edges_at(std::size_t i) const { return EdgeSet::support_of(beta[i]); }
};

enum class PseudoPenalty
{
    Paired,    // one group per unordered pair, both orientations
    Unpaired,  // one group per ordered pair (ablation only)
};

/// beta_u = ((Sigma + rho I)_{(-u,-u)})^{-1} (Sigma_{(-u,u)} + rho (Z_u - U_u)) for every u,
/// with `factors` built on Sigma + rho I.
Matrix beta_update(const Matrix& sigma, const LeaveOneOutCholesky& factors, const Matrix& z, const Matrix& u, double rho);

/// The same update from M = (Sigma + rho I)^{-1} in one product, using
/// (A_{(-u,-u)})^{-1} = M_{(-u,-u)} - M_{(-u,u)} M_{(u,-u)} / M_uu. Agrees with the
/// Givens route to rounding; much cheaper per ADMM iteration.
Matrix beta_update_schur(const Matrix& sigma, const Matrix& shifted_inverse, const Matrix& z, const Matrix& u, double rho);

enum class BetaSolve
{
    Schur,   // inverse of Sigma + rho I, one matrix product per iteration
    Givens,  // leave-one-out Cholesky factors, p triangular solve pairs per iteration
};

/// Same update across a sequence; factors are built internally.
RegressionCoefficients beta_update(const SmoothedMatrixSequence& sigmas,
                                   const std::vector<Matrix>& z,
                                   const std::vector<Matrix>& u,
                                   double rho);

/// Group soft-threshold at level lambda / rho over {V_uv(t_i), V_vu(t_i)}_i (paired)
/// or {V_uv(t_i)}_i (unpaired). Diagonals are set to zero.
std::vector<Matrix> paired_group_soft_threshold(const std::vector<Matrix>& values,
                                                double lambda,
                                                double rho,
                                                PseudoPenalty penalty = PseudoPenalty::Paired);

/// |N|^{-1/2} sum_i 1/2 sum_u ||X_u - sum_v beta_uv X_v||^2_{W(t_i)} + lambda * group penalty,
/// evaluated through the smoothed covariances.
double pseudo_objective(const std::vector<Matrix>& betas,
                        const SmoothedMatrixSequence& sigmas,
                        double lambda,
                        PseudoPenalty penalty = PseudoPenalty::Paired);

struct PseudoFit
{
    /// Z iterates: exact zeros, paired coherence.
    RegressionCoefficients coefficients;
    AdmmReport report;
    AdmmTrace trace;

    EdgeSet edges_at(std::size_t i) const { return coefficients.edges_at(i); }
};

/// ADMM minimiser of pseudo_objective. Throws NonConvergenceError when max_iter is reached.
PseudoFit admm_pseudo(const SmoothedMatrixSequence& sigmas,
                      double lambda,
                      const AdmmSettings& settings,
                      AdmmState* warm = nullptr,
                      PseudoPenalty penalty = PseudoPenalty::Paired,
                      BetaSolve beta_solve = BetaSolve::Schur);

}  // namespace loggle
