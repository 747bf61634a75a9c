#pragma once

#include "loggle/types.hpp"

#include <string>
#include <vector>

namespace loggle {

/// Observation times in [0,1], non-decreasing, at least one entry.
class TimeGrid
{
public:
    explicit TimeGrid(std::vector<double> times);

    /// Uniform grid (k-1)/(n-1), k = 1..n; a single point sits at 0.
    static TimeGrid uniform(std::size_t n);

    std::size_t size() const { return times_.size(); }
    double operator[](std::size_t k) const { return times_[k]; }
    const std::vector<double>& times() const { return times_; }

private:
    std::vector<double> times_;
};

/// N observations of p variables on a time grid. Immutable once built.
class TimeSeriesDataset
{
public:
    TimeSeriesDataset(Matrix values, TimeGrid grid, std::vector<std::string> names);

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }

    const Matrix& values() const { return values_; }
    const TimeGrid& grid() const { return grid_; }
    const std::vector<std::string>& names() const { return names_; }

private:
    Matrix values_;
    TimeGrid grid_;
    std::vector<std::string> names_;
};

/// Subtracts a Gaussian-kernel estimate of the mean function (kernel sd `bandwidth`)
/// evaluated at every observation time.
TimeSeriesDataset detrend(const TimeSeriesDataset& data, double bandwidth);

/// log(y_{k+1}/y_k) per column, regridded uniformly onto [0,1].
TimeSeriesDataset log_returns(const TimeSeriesDataset& prices);

/// Scales every column to unit sample standard deviation (n-1 denominator).
TimeSeriesDataset standardize(const TimeSeriesDataset& data);

}  // namespace loggle
