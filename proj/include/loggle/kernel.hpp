#pragma once

#include "loggle/dataset.hpp"
#include "loggle/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace loggle {

enum class KernelKind
{
    Epanechnikov,
    Gaussian,
};

/// Kernel shape and bandwidth. For the Gaussian kernel the bandwidth is the standard deviation.
struct KernelSpec
{
    KernelKind kind = KernelKind::Epanechnikov;
    double bandwidth = 0.1;
};

/// Unnormalised kernel value K((t_j - t)/h).
double kernel_value(KernelKind kind, double scaled_distance);

/// Normalised kernel weights of every grid time for estimation at `t`.
/// Throws EmptyWindowError if no grid time carries kernel mass.
Vector kernel_weights(double t, std::span<const double> times, const KernelSpec& spec);

/// Time window centred at `center_time`: all candidate times within `width`.
struct Neighborhood
{
    double center_time = 0.0;
    double width = 0.0;
    std::vector<double> member_times;
};

/// Members are the candidate times with |t_i - center| <= width. The centre is
/// appended when it is not itself a candidate time, so the result is never empty.
Neighborhood make_neighborhood(double center_time, double width, std::span<const double> candidate_times);

/// One smoothed matrix per time.
struct SmoothedMatrixSequence
{
    std::vector<double> times;
    std::vector<Matrix> matrices;

    std::size_t size() const { return matrices.size(); }
    Index dim() const { return matrices.empty() ? 0 : static_cast<Index>(matrices.front().rows()); }

    /// Restriction of every matrix to the listed variables.
    SmoothedMatrixSequence restrict_to(std::span<const Index> variables) const;
};

/// Kernel estimate sum_j w_j(t) x_j x_j^T. When `rows` is given only those
/// observations contribute (fold restriction).
Matrix smoothed_covariance(const TimeSeriesDataset& data,
                           double t,
                           const KernelSpec& spec,
                           std::span<const Index> rows = {});

/// Rescales a covariance to unit diagonal in place and returns the standard deviations.
/// Throws DegenerateVariableError on a non-positive diagonal entry.
Vector to_correlation(Matrix& sigma, const std::vector<std::string>* names = nullptr);

/// Smoothed covariances (or correlations) at every member time of the neighbourhood.
SmoothedMatrixSequence smoothed_covariances(const TimeSeriesDataset& data,
                                            const Neighborhood& nbhd,
                                            const KernelSpec& spec,
                                            bool as_correlation,
                                            std::span<const Index> rows = {});

}  // namespace loggle
