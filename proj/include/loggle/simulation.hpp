#pragma once

#include "loggle/dataset.hpp"
#include "loggle/types.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace loggle {

/// Seedable stream: mt19937_64 seeded through std::seed_seq, uniforms from the top 53 bits,
/// normals by the Box-Muller transform. Both pieces are fully specified by the standard,
/// so draws are identical across platforms and library versions.
class Rng
{
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Uniform on [0,1).
    double uniform();
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

enum class GeneratorKind
{
    TimeVarying,
    TimeInvariant,
};

/// Off-diagonal map of the time-varying generator:
/// sign(1 - 0.28/|x|) * (1 - 0.14/|x|)_+ * x.
double threshold_entry(double x);

class SimulationModel
{
public:
    GeneratorKind kind() const { return kind_; }
    Index dim() const { return dim_; }
    std::uint64_t seed() const { return seed_; }

    /// Generator output at t before any positive-definiteness check.
    Matrix raw_precision(double t) const;
    /// Throws GenerationError if the matrix at t is not positive definite.
    Matrix precision(double t) const;
    /// Off-diagonal support at t (defined whether or not the matrix is PD).
    EdgeSet edges(double t) const;
    /// Throws GenerationError at the first time whose matrix is not positive definite.
    void check_positive_definite(std::span<const double> times) const;

    friend SimulationModel simulate_time_varying(Index p, std::uint64_t seed);
    friend SimulationModel simulate_time_invariant(Index p, std::uint64_t seed);

private:
    GeneratorKind kind_ = GeneratorKind::TimeVarying;
    Index dim_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<Matrix> factors_;  // time-varying: B_1..B_4
    EdgeSet support_;              // time-invariant
    Matrix offsets_;               // time-invariant: c_uv on the support and c_uu
};

/// Smooth Cholesky-product model: four lower-triangular factors with N(0, 1/2) entries mixed by
/// sin/cos weights, squared, off-diagonals passed through threshold_entry, diagonal raised by log10(p)/4.
SimulationModel simulate_time_varying(Index p, std::uint64_t seed);

/// Fixed Erdos-Renyi support (probability 2/p) with sinusoidal entries sin(2 pi t - c_uv)
/// and diagonal |sin(2 pi t - c_uu)| + log10(p); offsets uniform on (0,1).
SimulationModel simulate_time_invariant(Index p, std::uint64_t seed);

/// Grid t_k = (k-1)/n_intervals, k = 1..n_intervals+1.
TimeGrid simulation_grid(std::size_t n_intervals);

/// One draw x_k ~ N(0, Omega(t_k)^{-1}) per grid time (n_intervals + 1 rows), from a stream
/// derived from the model seed.
TimeSeriesDataset sample_observations(const SimulationModel& model, std::size_t n_intervals);

}  // namespace loggle
