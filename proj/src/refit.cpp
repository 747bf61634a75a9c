#include "loggle/refit.hpp"

#include "loggle/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace loggle {

namespace {

Matrix inverse_spd(const Matrix& m, const char* what)
{
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw InfeasibleError(what);
    return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

struct LocalEdge
{
    Eigen::Index a;
    Eigen::Index b;
};

double local_violation(const Matrix& w, const Matrix& s, const std::vector<LocalEdge>& edges)
{
    double worst = (w.diagonal() - s.diagonal()).cwiseAbs().maxCoeff();
    for (const auto& e : edges) worst = std::max(worst, std::abs(w(e.a, e.b) - s(e.a, e.b)));
    return worst;
}

// IPS on one connected component (local indices).
Matrix fit_component(const Matrix& s, const std::vector<LocalEdge>& edges, const RefitSettings& settings, int& sweeps,
                     double& violation)
{
    const auto q = s.rows();
    if (static_cast<Eigen::Index>(edges.size()) == q * (q - 1) / 2) {
        Matrix omega = inverse_spd(s, "covariance block is not positive definite; no refit exists");
        violation = 0.0;
        return 0.5 * (omega + omega.transpose());
    }

    std::vector<Matrix> clique_inverse;
    clique_inverse.reserve(edges.size());
    for (const auto& e : edges) {
        Eigen::Matrix2d sc;
        sc << s(e.a, e.a), s(e.a, e.b), s(e.b, e.a), s(e.b, e.b);
        const double det = sc.determinant();
        if (!(sc(0, 0) > 0.0) || !(det > 0.0)) {
            throw InfeasibleError("2x2 covariance on an edge is not positive definite; no refit exists");
        }
        clique_inverse.push_back(sc.inverse());
    }

    Matrix omega = s.diagonal().cwiseInverse().asDiagonal();
    Matrix w = s.diagonal().asDiagonal();
    for (int sweep = 1; sweep <= settings.max_sweeps; ++sweep) {
        for (std::size_t c = 0; c < edges.size(); ++c) {
            const Eigen::Index idx[2] = {edges[c].a, edges[c].b};
            Eigen::Matrix2d wcc;
            wcc << w(idx[0], idx[0]), w(idx[0], idx[1]), w(idx[1], idx[0]), w(idx[1], idx[1]);
            const Eigen::Matrix2d delta = clique_inverse[c] - wcc.inverse();
            for (int r = 0; r < 2; ++r) {
                for (int k = 0; k < 2; ++k) omega(idx[r], idx[k]) += delta(r, k);
            }
            // Woodbury: W <- W - W_{:,C} Delta (I + W_CC Delta)^{-1} W_{C,:}
            Matrix wc(q, 2);
            wc.col(0) = w.col(idx[0]);
            wc.col(1) = w.col(idx[1]);
            const Eigen::Matrix2d core = delta * (Eigen::Matrix2d::Identity() + wcc * delta).inverse();
            w.noalias() -= wc * core * wc.transpose();
        }
        Eigen::LLT<Matrix> llt(omega);
        if (llt.info() != Eigen::Success) {
            throw InfeasibleError("refit iterate lost positive definiteness; no PD completion found");
        }
        w = llt.solve(Matrix::Identity(q, q));
        violation = local_violation(w, s, edges);
        if (violation <= settings.tol) {
            sweeps = std::max(sweeps, sweep);
            return 0.5 * (omega + omega.transpose());
        }
    }
    AdmmReport report;
    report.iterations = settings.max_sweeps;
    report.primal_residual = violation;
    report.primal_tolerance = settings.tol;
    throw NonConvergenceError("refit did not reach the stationarity tolerance", report);
}

}  // namespace

RefitResult refit_mle(const Matrix& sigma, const EdgeSet& edges, const RefitSettings& settings)
{
    const auto p = sigma.rows();
    if (sigma.cols() != p || !sigma.allFinite()) throw InvalidDataError("covariance must be a finite square matrix");
    if (edges.dim() != 0 && static_cast<Eigen::Index>(edges.dim()) != p) {
        throw InvalidDataError("edge set dimension does not match the covariance");
    }
    for (Eigen::Index u = 0; u < p; ++u) {
        if (!(sigma(u, u) > 0.0)) {
            throw InfeasibleError("variable V" + std::to_string(u + 1) + " has non-positive variance");
        }
    }

    // connected components of the edge graph
    std::vector<std::size_t> parent(static_cast<std::size_t>(p));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : edges) {
        const auto a = find(e.u);
        const auto b = find(e.v);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::vector<Index>> comps;
    std::vector<std::size_t> slot(static_cast<std::size_t>(p), static_cast<std::size_t>(-1));
    std::vector<std::size_t> local(static_cast<std::size_t>(p));
    for (Index v = 0; v < static_cast<Index>(p); ++v) {
        const auto r = find(v);
        if (slot[r] == static_cast<std::size_t>(-1)) {
            slot[r] = comps.size();
            comps.emplace_back();
        }
        local[v] = comps[slot[r]].size();
        comps[slot[r]].push_back(v);
    }
    std::vector<std::vector<LocalEdge>> comp_edges(comps.size());
    for (const auto& e : edges) {
        comp_edges[slot[find(e.u)]].push_back(
            {static_cast<Eigen::Index>(local[e.u]), static_cast<Eigen::Index>(local[e.v])});
    }

    RefitResult out;
    out.precision = Matrix::Zero(p, p);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        const auto& vars = comps[c];
        if (vars.size() == 1) {
            const auto v = static_cast<Eigen::Index>(vars.front());
            out.precision(v, v) = 1.0 / sigma(v, v);
            continue;
        }
        const auto q = static_cast<Eigen::Index>(vars.size());
        Matrix s(q, q);
        for (Eigen::Index a = 0; a < q; ++a) {
            for (Eigen::Index b = 0; b < q; ++b) {
                s(a, b) = sigma(static_cast<Eigen::Index>(vars[a]), static_cast<Eigen::Index>(vars[b]));
            }
        }
        double violation = 0.0;
        const Matrix block = fit_component(s, comp_edges[c], settings, out.sweeps, violation);
        out.violation = std::max(out.violation, violation);
        for (Eigen::Index a = 0; a < q; ++a) {
            for (Eigen::Index b = 0; b < q; ++b) {
                out.precision(static_cast<Eigen::Index>(vars[a]), static_cast<Eigen::Index>(vars[b])) = block(a, b);
            }
        }
    }
    return out;
}

double refit_stationarity(const Matrix& precision, const Matrix& sigma, const EdgeSet& edges)
{
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) throw DomainError("precision is not positive definite");
    const Matrix w = llt.solve(Matrix::Identity(precision.rows(), precision.cols()));
    double worst = (w.diagonal() - sigma.diagonal()).cwiseAbs().maxCoeff();
    for (const auto& e : edges) {
        const auto u = static_cast<Eigen::Index>(e.u);
        const auto v = static_cast<Eigen::Index>(e.v);
        worst = std::max(worst, std::abs(w(u, v) - sigma(u, v)));
    }
    return worst;
}

}  // namespace loggle
