#include "loggle/simulation.hpp"

#include "loggle/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace loggle {

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0,1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double threshold_entry(double x)
{
    const double a = std::abs(x);
    if (a == 0.0) return 0.0;
    const double shrink = std::max(0.0, 1.0 - 0.14 / a);
    if (shrink == 0.0) return 0.0;
    const double sign = 1.0 - 0.28 / a >= 0.0 ? 1.0 : -1.0;
    return sign * shrink * x;
}

namespace {

constexpr std::uint64_t kSampleStream = 0x5eed'0001;

}  // namespace

SimulationModel simulate_time_varying(Index p, std::uint64_t seed)
{
    if (p < 2) throw ParameterError("generator needs p >= 2");
    SimulationModel m;
    m.kind_ = GeneratorKind::TimeVarying;
    m.dim_ = p;
    m.seed_ = seed;
    Rng rng(seed);
    const double sd = std::sqrt(0.5);
    const auto n = static_cast<Eigen::Index>(p);
    for (int k = 0; k < 4; ++k) {
        Matrix b = Matrix::Zero(n, n);
        for (Eigen::Index u = 0; u < n; ++u) {
            for (Eigen::Index v = 0; v <= u; ++v) b(u, v) = sd * rng.normal();
        }
        m.factors_.push_back(std::move(b));
    }
    return m;
}

SimulationModel simulate_time_invariant(Index p, std::uint64_t seed)
{
    if (p < 2) throw ParameterError("generator needs p >= 2");
    SimulationModel m;
    m.kind_ = GeneratorKind::TimeInvariant;
    m.dim_ = p;
    m.seed_ = seed;
    Rng rng(seed);
    const double prob = 2.0 / static_cast<double>(p);
    m.support_ = EdgeSet(p);
    for (Index u = 0; u < p; ++u) {
        for (Index v = u + 1; v < p; ++v) {
            if (rng.uniform() < prob) m.support_.insert(u, v);
        }
    }
    const auto n = static_cast<Eigen::Index>(p);
    m.offsets_ = Matrix::Zero(n, n);
    for (const auto& e : m.support_) {
        const double c = rng.uniform();
        m.offsets_(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = c;
        m.offsets_(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = c;
    }
    for (Eigen::Index u = 0; u < n; ++u) m.offsets_(u, u) = rng.uniform();
    return m;
}

Matrix SimulationModel::raw_precision(double t) const
{
    const auto n = static_cast<Eigen::Index>(dim_);
    const double log_p = std::log10(static_cast<double>(dim_));
    if (kind_ == GeneratorKind::TimeVarying) {
        const double pi = std::numbers::pi;
        const double phi[4] = {std::sin(pi * t / 2.0), std::cos(pi * t / 2.0), std::sin(pi * t / 4.0),
                               std::cos(pi * t / 4.0)};
        Matrix g = Matrix::Zero(n, n);
        for (int k = 0; k < 4; ++k) g += phi[k] * factors_[static_cast<std::size_t>(k)];
        g /= 2.0;
        Matrix omega = g * g.transpose();
        for (Eigen::Index u = 0; u < n; ++u) {
            for (Eigen::Index v = 0; v < n; ++v) {
                if (u != v) omega(u, v) = threshold_entry(omega(u, v));
            }
        }
        omega.diagonal().array() += log_p / 4.0;
        return 0.5 * (omega + omega.transpose());
    }

    const double two_pi_t = 2.0 * std::numbers::pi * t;
    Matrix omega = Matrix::Zero(n, n);
    for (const auto& e : support_) {
        const auto u = static_cast<Eigen::Index>(e.u);
        const auto v = static_cast<Eigen::Index>(e.v);
        const double val = std::sin(two_pi_t - offsets_(u, v));
        omega(u, v) = val;
        omega(v, u) = val;
    }
    for (Eigen::Index u = 0; u < n; ++u) omega(u, u) = std::abs(std::sin(two_pi_t - offsets_(u, u))) + log_p;
    return omega;
}

Matrix SimulationModel::precision(double t) const
{
    Matrix omega = raw_precision(t);
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "generated precision matrix is not positive definite at t=" << t << " (seed " << seed_ << ")";
        throw GenerationError(os.str(), t);
    }
    return omega;
}

EdgeSet SimulationModel::edges(double t) const
{
    if (kind_ == GeneratorKind::TimeInvariant) {
        // entries sin(2 pi t - c) vanish only on a measure-zero set; the graph is the support
        return support_;
    }
    return EdgeSet::support_of(raw_precision(t));
}

void SimulationModel::check_positive_definite(std::span<const double> times) const
{
    for (double t : times) (void)precision(t);
}

TimeGrid simulation_grid(std::size_t n_intervals)
{
    if (n_intervals == 0) throw ParameterError("simulation needs N >= 1");
    std::vector<double> times(n_intervals + 1);
    for (std::size_t k = 0; k <= n_intervals; ++k) {
        times[k] = static_cast<double>(k) / static_cast<double>(n_intervals);
    }
    return TimeGrid(std::move(times));
}

TimeSeriesDataset sample_observations(const SimulationModel& model, std::size_t n_intervals)
{
    TimeGrid grid = simulation_grid(n_intervals);
    const auto p = static_cast<Eigen::Index>(model.dim());
    Matrix values(static_cast<Eigen::Index>(grid.size()), p);
    Rng rng(model.seed(), kSampleStream);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Matrix omega = model.precision(grid[k]);
        Eigen::LLT<Matrix> llt(omega);
        Vector z(p);
        for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
        // Omega = L L^T, x = L^{-T} z has covariance Omega^{-1}
        const Vector x = llt.matrixU().solve(z);
        values.row(static_cast<Eigen::Index>(k)) = x.transpose();
    }
    return TimeSeriesDataset(std::move(values), std::move(grid), {});
}

}  // namespace loggle
