#include "loggle/likelihood.hpp"

#include "loggle/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace loggle {

EdgeSet PrecisionSequence::shared_support() const
{
    const Index p = dim();
    EdgeSet out(p);
    for (Index u = 0; u < p; ++u) {
        for (Index v = u + 1; v < p; ++v) {
            for (const auto& m : matrices) {
                if (m(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) != 0.0) {
                    out.insert(u, v);
                    break;
                }
            }
        }
    }
    return out;
}

Matrix eigen_prox(const Matrix& m, double rho)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    const Vector& lam = eig.eigenvalues();
    Vector mapped(lam.size());
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
        mapped[j] = (-lam[j] + std::sqrt(lam[j] * lam[j] + 4.0 * rho)) / (2.0 * rho);
    }
    const Matrix& q = eig.eigenvectors();
    Matrix x = q * mapped.asDiagonal() * q.transpose();
    return 0.5 * (x + x.transpose());
}

std::vector<Matrix> group_soft_threshold(const std::vector<Matrix>& values, double lambda, double rho)
{
    std::vector<Matrix> out = values;
    if (values.empty()) return out;
    const double cut = lambda / rho;
    const Eigen::Index p = values.front().rows();
    for (Eigen::Index u = 0; u < p; ++u) {
        for (Eigen::Index v = u + 1; v < p; ++v) {
            double sq = 0.0;
            for (const auto& m : values) sq += m(u, v) * m(u, v);
            const double norm = std::sqrt(sq);
            const double factor = norm > cut ? 1.0 - cut / norm : 0.0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double val = factor * values[i](u, v);
                out[i](u, v) = val;
                out[i](v, u) = val;
            }
        }
    }
    return out;
}

namespace {

double group_penalty(const std::vector<Matrix>& omegas)
{
    const Eigen::Index p = omegas.front().rows();
    double total = 0.0;
    for (Eigen::Index u = 0; u < p; ++u) {
        for (Eigen::Index v = u + 1; v < p; ++v) {
            double sq = 0.0;
            for (const auto& m : omegas) sq += m(u, v) * m(u, v);
            total += 2.0 * std::sqrt(sq);  // both (u,v) and (v,u)
        }
    }
    return total;
}

double frob_sq(const std::vector<Matrix>& ms)
{
    double s = 0.0;
    for (const auto& m : ms) s += m.squaredNorm();
    return s;
}

}  // namespace

double likelihood_objective(const std::vector<Matrix>& omegas, const SmoothedMatrixSequence& sigmas, double lambda)
{
    if (omegas.empty()) return 0.0;
    double fit = 0.0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        Eigen::LLT<Matrix> llt(omegas[i]);
        if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
        double logdet = 0.0;
        const Matrix& l = llt.matrixLLT();
        for (Eigen::Index j = 0; j < l.rows(); ++j) {
            if (!(l(j, j) > 0.0)) return std::numeric_limits<double>::infinity();
            logdet += 2.0 * std::log(l(j, j));
        }
        fit += (omegas[i].cwiseProduct(sigmas.matrices[i])).sum() - logdet;
    }
    return fit / std::sqrt(static_cast<double>(omegas.size())) + lambda * group_penalty(omegas);
}

LikelihoodFit admm_likelihood(const SmoothedMatrixSequence& sigmas,
                              double lambda,
                              const AdmmSettings& settings,
                              AdmmState* warm)
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
    // Dividing Eq. (1) by |N|^{-1/2} leaves sum_i[tr - logdet] + sqrt(|N|) lambda * penalty.
    // With the scaled augmented Lagrangian (rho/2)||Omega - Z + U||^2 on that problem
    // the Omega-step reads Omega^{-1} - rho~ Omega = Sigma - rho~ (Z - U) with
    // rho~ = rho sqrt(|N|), while the Z-step keeps the threshold lambda / rho.
    const double rho_step = rho * std::sqrt(static_cast<double>(n));

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

    LikelihoodFit fit;
    std::vector<Matrix> omega(n);
    std::vector<Matrix> shifted(n);
    const double sqrt_pn = std::sqrt(static_cast<double>(dim * n));
    AdmmReport& report = fit.report;

    for (int iter = 1; iter <= settings.max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            omega[i] = eigen_prox(sigmas.matrices[i] - rho_step * (z[i] - u[i]), rho_step);
        }
        const std::vector<Matrix> z_old = z;
        for (std::size_t i = 0; i < n; ++i) {
            shifted[i] = settings.alpha * omega[i] + (1.0 - settings.alpha) * z_old[i] + u[i];
        }
        z = group_soft_threshold(shifted, lambda, rho);
        double r_sq = 0.0;
        double d_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = shifted[i] - z[i];
            r_sq += (omega[i] - z[i]).squaredNorm();
            d_sq += (z[i] - z_old[i]).squaredNorm();
        }
        report.iterations = iter;
        report.primal_residual = std::sqrt(r_sq);
        report.dual_residual = std::sqrt(d_sq);
        report.primal_tolerance =
            settings.eps_abs * sqrt_pn + settings.eps_rel * std::sqrt(std::max(frob_sq(omega), frob_sq(z)));
        report.dual_tolerance = settings.eps_abs * sqrt_pn + settings.eps_rel * std::sqrt(frob_sq(u));
        if (settings.record_trace) {
            fit.trace.primal_residual.push_back(report.primal_residual);
            fit.trace.dual_residual.push_back(report.dual_residual);
            fit.trace.objective.push_back(likelihood_objective(omega, sigmas, lambda));
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
        os << "likelihood ADMM did not converge in " << settings.max_iter << " iterations (r=" << report.primal_residual
           << ", s=" << report.dual_residual << ")";
        throw NonConvergenceError(os.str(), report);
    }

    fit.precision.times = sigmas.times;
    fit.precision.matrices = std::move(z);
    fit.precision.dense = std::move(omega);
    return fit;
}

double kkt_residual(const PrecisionSequence& solution, const SmoothedMatrixSequence& sigmas, double lambda)
{
    const std::size_t n = solution.size();
    if (n != sigmas.size() || solution.dim() != sigmas.dim()) {
        throw InvalidDataError("solution and covariance sequence do not match");
    }
    if (n == 0) return 0.0;
    const auto p = static_cast<Eigen::Index>(solution.dim());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<Matrix> grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::LLT<Matrix> llt(solution.matrices[i]);
        if (llt.info() != Eigen::Success) throw DomainError("precision estimate is not positive definite");
        grad[i] = scale * (sigmas.matrices[i] - llt.solve(Matrix::Identity(p, p)));
    }
    double worst = 0.0;
    for (Eigen::Index a = 0; a < p; ++a) {
        for (const auto& g : grad) worst = std::max(worst, std::abs(g(a, a)));
        for (Eigen::Index b = a + 1; b < p; ++b) {
            double omega_sq = 0.0;
            for (const auto& m : solution.matrices) omega_sq += m(a, b) * m(a, b);
            if (omega_sq > 0.0) {
                const double norm = std::sqrt(omega_sq);
                for (std::size_t i = 0; i < n; ++i) {
                    worst = std::max(worst, std::abs(grad[i](a, b) + lambda * solution.matrices[i](a, b) / norm));
                }
            } else {
                double g_sq = 0.0;
                for (const auto& g : grad) g_sq += g(a, b) * g(a, b);
                worst = std::max(worst, std::sqrt(g_sq) - lambda);
            }
        }
    }
    return worst;
}

}  // namespace loggle
