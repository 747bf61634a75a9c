#include "loggle/screening.hpp"

#include "loggle/errors.hpp"

#include <algorithm>
#include <numeric>

namespace loggle {

Index BlockPartition::dim() const
{
    Index p = 0;
    for (const auto& b : blocks) p += b.size();
    return p;
}

std::size_t BlockPartition::largest() const
{
    std::size_t m = 0;
    for (const auto& b : blocks) m = std::max(m, b.size());
    return m;
}

std::vector<std::size_t> BlockPartition::labels() const
{
    std::vector<std::size_t> out(dim(), 0);
    for (std::size_t l = 0; l < blocks.size(); ++l) {
        for (Index v : blocks[l]) out[v] = l;
    }
    return out;
}

Adjacency screen_adjacency(const SmoothedMatrixSequence& sigmas, double lambda)
{
    if (!(lambda > 0.0)) throw ParameterError("screening needs lambda > 0");
    const auto p = static_cast<Eigen::Index>(sigmas.dim());
    const double n = static_cast<double>(sigmas.size());
    const double bound = lambda * lambda;
    Adjacency a = Adjacency::Zero(p, p);
    for (Eigen::Index u = 0; u < p; ++u) {
        for (Eigen::Index v = u + 1; v < p; ++v) {
            double sq = 0.0;
            for (const auto& s : sigmas.matrices) sq += s(u, v) * s(u, v);
            if (sq / n > bound) {
                a(u, v) = 1;
                a(v, u) = 1;
            }
        }
    }
    return a;
}

BlockPartition connected_components(const Adjacency& adjacency)
{
    const auto p = static_cast<std::size_t>(adjacency.rows());
    std::vector<std::size_t> parent(p);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t u = 0; u < p; ++u) {
        for (std::size_t v = u + 1; v < p; ++v) {
            if (adjacency(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) != 0) {
                const auto ru = find(u);
                const auto rv = find(v);
                if (ru != rv) parent[std::max(ru, rv)] = std::min(ru, rv);
            }
        }
    }
    // roots are the smallest members, so scanning in order yields blocks sorted by smallest member
    BlockPartition out;
    std::vector<std::size_t> slot(p, p);
    for (std::size_t v = 0; v < p; ++v) {
        const auto r = find(v);
        if (slot[r] == p) {
            slot[r] = out.blocks.size();
            out.blocks.emplace_back();
        }
        out.blocks[slot[r]].push_back(v);
    }
    return out;
}

EdgeSet BlockwiseFit::shared_support() const
{
    if (support.empty()) return EdgeSet();
    const Index p = static_cast<Index>(support.front().rows());
    EdgeSet out(p);
    for (const auto& m : support) {
        for (const auto& e : EdgeSet::support_of(m)) out.insert(e.u, e.v);
    }
    return out;
}

PrecisionSequence BlockwiseFit::precision() const
{
    if (solver != SolverKind::Likelihood) throw ParameterError("pseudo-likelihood fits carry no precision matrices");
    return PrecisionSequence{times, support, dense};
}

BlockwiseFit solve_blockwise(const SmoothedMatrixSequence& sigmas,
                             double lambda,
                             SolverKind solver,
                             const AdmmSettings& settings,
                             AdmmState* warm)
{
    const std::size_t n = sigmas.size();
    if (n == 0) throw InvalidDataError("empty covariance sequence");
    const Index dim = sigmas.dim();
    const auto p = static_cast<Eigen::Index>(dim);

    BlockwiseFit fit;
    fit.solver = solver;
    fit.times = sigmas.times;
    fit.partition = connected_components(screen_adjacency(sigmas, lambda));
    fit.support.assign(n, Matrix::Zero(p, p));
    if (solver == SolverKind::Likelihood) fit.dense.assign(n, Matrix::Zero(p, p));
    fit.report.converged = true;

    for (const auto& block : fit.partition.blocks) {
        if (block.size() == 1) {
            const auto v = static_cast<Eigen::Index>(block.front());
            if (solver == SolverKind::Pseudo) continue;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = sigmas.matrices[i](v, v);
                if (!(s > 0.0)) {
                    const std::string name = "V" + std::to_string(v + 1);
                    throw DegenerateVariableError("variable " + name + " has non-positive smoothed variance", name);
                }
                fit.support[i](v, v) = 1.0 / s;
                fit.dense[i](v, v) = 1.0 / s;
            }
            continue;
        }

        const SmoothedMatrixSequence sub = sigmas.restrict_to(block);
        AdmmState block_state;
        AdmmState* block_warm = nullptr;
        if (warm) {
            block_state = warm->restrict_to(block, n, dim);
            block_warm = &block_state;
        }

        std::vector<Matrix> support_block;
        std::vector<Matrix> dense_block;
        AdmmReport report;
        try {
            if (solver == SolverKind::Likelihood) {
                LikelihoodFit r = admm_likelihood(sub, lambda, settings, block_warm);
                support_block = std::move(r.precision.matrices);
                dense_block = std::move(r.precision.dense);
                report = r.report;
            } else {
                PseudoFit r = admm_pseudo(sub, lambda, settings, block_warm);
                support_block = std::move(r.coefficients.beta);
                report = r.report;
            }
        } catch (const NonConvergenceError&) {
            if (warm) warm->scatter(block_state, block, n, dim);
            throw;
        }
        if (warm) warm->scatter(block_state, block, n, dim);

        fit.report.iterations = std::max(fit.report.iterations, report.iterations);
        fit.report.primal_residual = std::max(fit.report.primal_residual, report.primal_residual);
        fit.report.dual_residual = std::max(fit.report.dual_residual, report.dual_residual);
        fit.report.primal_tolerance = std::max(fit.report.primal_tolerance, report.primal_tolerance);
        fit.report.dual_tolerance = std::max(fit.report.dual_tolerance, report.dual_tolerance);

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t a = 0; a < block.size(); ++a) {
                for (std::size_t b = 0; b < block.size(); ++b) {
                    const auto ra = static_cast<Eigen::Index>(block[a]);
                    const auto rb = static_cast<Eigen::Index>(block[b]);
                    const auto la = static_cast<Eigen::Index>(a);
                    const auto lb = static_cast<Eigen::Index>(b);
                    fit.support[i](ra, rb) = support_block[i](la, lb);
                    if (solver == SolverKind::Likelihood) fit.dense[i](ra, rb) = dense_block[i](la, lb);
                }
            }
        }
    }
    return fit;
}

}  // namespace loggle
