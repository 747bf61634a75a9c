#include "loggle/admm.hpp"

#include <cmath>

namespace loggle {

void AdmmSettings::validate() const
{
    if (rho && !(*rho > 0.0)) throw ParameterError("ADMM rho must be positive");
    if (!(alpha >= 1.0 && alpha <= 2.0)) throw ParameterError("ADMM relaxation alpha must lie in [1,2]");
    if (!(eps_abs > 0.0) || !(eps_rel > 0.0)) throw ParameterError("ADMM tolerances must be positive");
    if (max_iter <= 0) throw ParameterError("ADMM max_iter must be positive");
}

double AdmmSettings::rho_for(double lambda) const
{
    if (rho) return *rho;
    return lambda > 0.0 ? lambda : 1.0;
}

AdmmState AdmmState::restrict_to(std::span<const Index> variables, std::size_t times, Index full_dim) const
{
    AdmmState out;
    if (!matches(times, full_dim)) return out;
    out.rho = rho;
    const auto q = static_cast<Eigen::Index>(variables.size());
    auto take = [&](const Matrix& m) {
        Matrix sub(q, q);
        for (Eigen::Index a = 0; a < q; ++a) {
            for (Eigen::Index b = 0; b < q; ++b) {
                sub(a, b) = m(static_cast<Eigen::Index>(variables[a]), static_cast<Eigen::Index>(variables[b]));
            }
        }
        return sub;
    };
    for (std::size_t i = 0; i < times; ++i) {
        out.z.push_back(take(z[i]));
        out.u.push_back(take(u[i]));
    }
    return out;
}

void AdmmState::scatter(const AdmmState& block, std::span<const Index> variables, std::size_t times, Index full_dim)
{
    if (!matches(times, full_dim)) {
        const auto p = static_cast<Eigen::Index>(full_dim);
        z.assign(times, Matrix::Zero(p, p));
        u.assign(times, Matrix::Zero(p, p));
    }
    rho = block.rho;
    const auto q = static_cast<Eigen::Index>(variables.size());
    for (std::size_t i = 0; i < times && i < block.z.size(); ++i) {
        for (Eigen::Index a = 0; a < q; ++a) {
            for (Eigen::Index b = 0; b < q; ++b) {
                const auto ra = static_cast<Eigen::Index>(variables[a]);
                const auto rb = static_cast<Eigen::Index>(variables[b]);
                z[i](ra, rb) = block.z[i](a, b);
                u[i](ra, rb) = block.u[i](a, b);
            }
        }
    }
}

}  // namespace loggle
