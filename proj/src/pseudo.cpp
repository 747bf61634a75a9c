#include "loggle/pseudo.hpp"

#include "loggle/errors.hpp"

#include <cmath>
#include <sstream>

namespace loggle {

Matrix cholesky_delete(const Matrix& upper, Index j)
{
    const auto p = upper.rows();
    const auto jj = static_cast<Eigen::Index>(j);
    if (upper.cols() != p) throw ParameterError("Cholesky factor must be square");
    if (jj < 0 || jj >= p) throw ParameterError("deletion index out of range");

    // p x (p-1) factor with column j removed; rows k, k+1 for k >= j carry one subdiagonal entry.
    Matrix r(p, p - 1);
    r.leftCols(jj) = upper.leftCols(jj);
    r.rightCols(p - 1 - jj) = upper.rightCols(p - 1 - jj);

    for (Eigen::Index k = jj; k < p - 1; ++k) {
        const double a = r(k, k);
        const double b = r(k + 1, k);
        if (b == 0.0) continue;
        const double h = std::hypot(a, b);
        const double c = a / h;
        const double s = b / h;
        for (Eigen::Index col = k; col < p - 1; ++col) {
            const double x = r(k, col);
            const double y = r(k + 1, col);
            r(k, col) = c * x + s * y;
            r(k + 1, col) = -s * x + c * y;
        }
        r(k + 1, k) = 0.0;
    }

    Matrix out = r.topRows(p - 1).triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < p - 1; ++k) {
        if (out(k, k) < 0.0) out.row(k) *= -1.0;
    }
    return out;
}

LeaveOneOutCholesky::LeaveOneOutCholesky(const Matrix& a, bool cache)
{
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
    upper_ = llt.matrixU();
    if (cache) {
        deleted_.reserve(static_cast<std::size_t>(upper_.rows()));
        for (Index j = 0; j < dim(); ++j) deleted_.push_back(cholesky_delete(upper_, j));
    }
}

Vector LeaveOneOutCholesky::solve(Index u, const Vector& rhs) const
{
    Matrix local;
    const Matrix* factor = nullptr;
    if (deleted_.empty()) {
        local = cholesky_delete(upper_, u);
        factor = &local;
    } else {
        factor = &deleted_[u];
    }
    Vector x = factor->transpose().triangularView<Eigen::Lower>().solve(rhs);
    factor->triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

namespace {

// Copies row u of m without its diagonal entry.
Vector row_without(const Matrix& m, Eigen::Index u)
{
    const auto p = m.cols();
    Vector out(p - 1);
    for (Eigen::Index v = 0, k = 0; v < p; ++v) {
        if (v != u) out[k++] = m(u, v);
    }
    return out;
}

double frob_sq(const std::vector<Matrix>& ms)
{
    double s = 0.0;
    for (const auto& m : ms) s += m.squaredNorm();
    return s;
}

// Above this many stored doubles per solve the deleted factors are recomputed on demand.
constexpr double kFactorCacheBudget = 8.0e6;

}  // namespace

Matrix beta_update(const Matrix& sigma, const LeaveOneOutCholesky& factors, const Matrix& z, const Matrix& u, double rho)
{
    const auto p = sigma.rows();
    Matrix beta = Matrix::Zero(p, p);
    if (p < 2) return beta;
    for (Eigen::Index a = 0; a < p; ++a) {
        const Vector rhs = row_without(sigma, a) + rho * (row_without(z, a) - row_without(u, a));
        const Vector x = factors.solve(static_cast<Index>(a), rhs);
        for (Eigen::Index v = 0, k = 0; v < p; ++v) {
            if (v != a) beta(a, v) = x[k++];
        }
    }
    return beta;
}

Matrix beta_update_schur(const Matrix& sigma, const Matrix& shifted_inverse, const Matrix& z, const Matrix& u, double rho)
{
    const auto p = sigma.rows();
    if (p < 2) return Matrix::Zero(p, p);
    // row a of r is the right-hand side for regression a, zero at a
    Matrix r = sigma + rho * (z - u);
    r.diagonal().setZero();
    const Matrix& m = shifted_inverse;
    Vector s(p);
    for (Eigen::Index a = 0; a < p; ++a) s[a] = r.row(a).dot(m.col(a)) / m(a, a);
    r.diagonal() = -s;
    Matrix beta = r * m;
    beta.diagonal().setZero();
    return beta;
}

RegressionCoefficients beta_update(const SmoothedMatrixSequence& sigmas,
                                   const std::vector<Matrix>& z,
                                   const std::vector<Matrix>& u,
                                   double rho)
{
    RegressionCoefficients out;
    out.times = sigmas.times;
    const auto p = static_cast<Eigen::Index>(sigmas.dim());
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const Matrix shifted = sigmas.matrices[i] + rho * Matrix::Identity(p, p);
        const LeaveOneOutCholesky factors(shifted);
        out.beta.push_back(beta_update(sigmas.matrices[i], factors, z[i], u[i], rho));
    }
    return out;
}

std::vector<Matrix> paired_group_soft_threshold(const std::vector<Matrix>& values,
                                                double lambda,
                                                double rho,
                                                PseudoPenalty penalty)
{
    std::vector<Matrix> out = values;
    if (values.empty()) return out;
    const double cut = lambda / rho;
    const Eigen::Index p = values.front().rows();
    auto shrink = [cut](double sq) {
        const double norm = std::sqrt(sq);
        return norm > cut ? 1.0 - cut / norm : 0.0;
    };
    for (auto& m : out) m.diagonal().setZero();
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = a + 1; b < p; ++b) {
            double sq_ab = 0.0;
            double sq_ba = 0.0;
            for (const auto& m : values) {
                sq_ab += m(a, b) * m(a, b);
                sq_ba += m(b, a) * m(b, a);
            }
            double f_ab;
            double f_ba;
            if (penalty == PseudoPenalty::Paired) {
                f_ab = f_ba = shrink(sq_ab + sq_ba);
            } else {
                f_ab = shrink(sq_ab);
                f_ba = shrink(sq_ba);
            }
            for (std::size_t i = 0; i < values.size(); ++i) {
                out[i](a, b) = f_ab * values[i](a, b);
                out[i](b, a) = f_ba * values[i](b, a);
            }
        }
    }
    return out;
}

double pseudo_objective(const std::vector<Matrix>& betas,
                        const SmoothedMatrixSequence& sigmas,
                        double lambda,
                        PseudoPenalty penalty)
{
    if (betas.empty()) return 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const Matrix& b = betas[i];
        const Matrix& s = sigmas.matrices[i];
        // sum_u [S_uu - 2 b_u . S_u + b_u^T S b_u] = tr(S) - 2 tr(B S) + tr(B S B^T)
        loss += 0.5 * (s.trace() - 2.0 * (b * s).trace() + (b * s * b.transpose()).trace());
    }
    const Eigen::Index p = betas.front().rows();
    double pen = 0.0;
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index c = a + 1; c < p; ++c) {
            double sq_ac = 0.0;
            double sq_ca = 0.0;
            for (const auto& b : betas) {
                sq_ac += b(a, c) * b(a, c);
                sq_ca += b(c, a) * b(c, a);
            }
            pen += penalty == PseudoPenalty::Paired ? std::sqrt(sq_ac + sq_ca) : std::sqrt(sq_ac) + std::sqrt(sq_ca);
        }
    }
    return loss / std::sqrt(static_cast<double>(betas.size())) + lambda * pen;
}

PseudoFit admm_pseudo(const SmoothedMatrixSequence& sigmas,
                      double lambda,
                      const AdmmSettings& settings,
                      AdmmState* warm,
                      PseudoPenalty penalty,
                      BetaSolve beta_solve)
{
    settings.validate();
    if (!(lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
    const std::size_t n = sigmas.size();
    if (n == 0) throw InvalidDataError("empty covariance sequence");
    const Index dim = sigmas.dim();
    const auto p = static_cast<Eigen::Index>(dim);
    for (const auto& s : sigmas.matrices) {
        if (s.rows() != p || s.cols() != p || !s.allFinite()) {
            throw InvalidDataError("covariance sequence has inconsistent or non-finite matrices");
        }
    }

    const double rho = settings.rho_for(lambda);
    // Same scaling as the likelihood solver: the |N|^{-1/2} loss factor moves into the
    // beta-step penalty rho~ = rho sqrt(|N|); the threshold stays lambda / rho.
    const double rho_step = rho * std::sqrt(static_cast<double>(n));

    const bool cache = static_cast<double>(n) * static_cast<double>(dim) * static_cast<double>(dim) *
                           static_cast<double>(dim) <=
                       kFactorCacheBudget;
    std::vector<LeaveOneOutCholesky> factors;
    std::vector<Matrix> inverses;
    for (const auto& s : sigmas.matrices) {
        const Matrix shifted = s + rho_step * Matrix::Identity(p, p);
        if (beta_solve == BetaSolve::Givens) {
            factors.emplace_back(shifted, cache);
            continue;
        }
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
        inverses.push_back(llt.solve(Matrix::Identity(p, p)));
    }

    std::vector<Matrix> z;
    std::vector<Matrix> u;
    if (warm && warm->matches(n, dim) && warm->rho > 0.0) {
        z = warm->z;
        u = warm->u;
        const double scale = warm->rho / rho;
        if (scale != 1.0) {
            for (auto& m : u) m *= scale;
        }
    } else {
        z.assign(n, Matrix::Zero(p, p));
        u.assign(n, Matrix::Zero(p, p));
    }

    PseudoFit fit;
    std::vector<Matrix> beta(n);
    std::vector<Matrix> shifted(n);
    const double sqrt_pn = std::sqrt(static_cast<double>(dim * n));
    AdmmReport& report = fit.report;

    for (int iter = 1; iter <= settings.max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            beta[i] = beta_solve == BetaSolve::Givens
                          ? beta_update(sigmas.matrices[i], factors[i], z[i], u[i], rho_step)
                          : beta_update_schur(sigmas.matrices[i], inverses[i], z[i], u[i], rho_step);
        }
        const std::vector<Matrix> z_old = z;
        for (std::size_t i = 0; i < n; ++i) {
            shifted[i] = settings.alpha * beta[i] + (1.0 - settings.alpha) * z_old[i] + u[i];
        }
        z = paired_group_soft_threshold(shifted, lambda, rho, penalty);
        double r_sq = 0.0;
        double d_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = shifted[i] - z[i];
            u[i].diagonal().setZero();
            r_sq += (beta[i] - z[i]).squaredNorm();
            d_sq += (z[i] - z_old[i]).squaredNorm();
        }
        report.iterations = iter;
        report.primal_residual = std::sqrt(r_sq);
        report.dual_residual = std::sqrt(d_sq);
        report.primal_tolerance =
            settings.eps_abs * sqrt_pn + settings.eps_rel * std::sqrt(std::max(frob_sq(beta), frob_sq(z)));
        report.dual_tolerance = settings.eps_abs * sqrt_pn + settings.eps_rel * std::sqrt(frob_sq(u));
        if (settings.record_trace) {
            fit.trace.primal_residual.push_back(report.primal_residual);
            fit.trace.dual_residual.push_back(report.dual_residual);
            fit.trace.objective.push_back(pseudo_objective(beta, sigmas, lambda, penalty));
        }
        if (report.primal_residual <= report.primal_tolerance && report.dual_residual <= report.dual_tolerance) {
            report.converged = true;
            break;
        }
    }

    if (warm) {
        warm->z = z;
        warm->u = u;
        warm->rho = rho;
    }
    if (!report.converged) {
        std::ostringstream os;
        os << "pseudo-likelihood ADMM did not converge in " << settings.max_iter
           << " iterations (r=" << report.primal_residual << ", s=" << report.dual_residual << ")";
        throw NonConvergenceError(os.str(), report);
    }

    fit.coefficients.times = sigmas.times;
    fit.coefficients.beta = std::move(z);
    return fit;
}

}  // namespace loggle
