#include "loggle/dataset.hpp"

#include "loggle/errors.hpp"
#include "loggle/kernel.hpp"

#include <cmath>
#include <string>

namespace loggle {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times))
{
    if (times_.empty()) throw InvalidDataError("time grid must contain at least one point");
    for (std::size_t k = 0; k < times_.size(); ++k) {
        const double t = times_[k];
        if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
            throw InvalidDataError("time " + std::to_string(t) + " at row " + std::to_string(k + 1) +
                                   " is outside [0,1]");
        }
        if (k > 0 && t < times_[k - 1]) {
            throw InvalidDataError("time grid decreases at row " + std::to_string(k + 1));
        }
    }
}

TimeGrid TimeGrid::uniform(std::size_t n)
{
    std::vector<double> times(n, 0.0);
    if (n > 1) {
        for (std::size_t k = 0; k < n; ++k) times[k] = static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return TimeGrid(std::move(times));
}

TimeSeriesDataset::TimeSeriesDataset(Matrix values, TimeGrid grid, std::vector<std::string> names)
    : values_(std::move(values)), grid_(std::move(grid)), names_(std::move(names))
{
    if (static_cast<std::size_t>(values_.rows()) != grid_.size()) {
        throw InvalidDataError("dataset has " + std::to_string(values_.rows()) + " rows but " +
                               std::to_string(grid_.size()) + " time points");
    }
    if (names_.empty()) {
        for (Eigen::Index j = 0; j < values_.cols(); ++j) names_.push_back("V" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
        throw InvalidDataError("dataset has " + std::to_string(values_.cols()) + " columns but " +
                               std::to_string(names_.size()) + " names");
    }
    if (!values_.allFinite()) throw InvalidDataError("dataset contains non-finite values");
}

TimeSeriesDataset detrend(const TimeSeriesDataset& data, double bandwidth)
{
    if (!(bandwidth > 0.0)) throw ParameterError("detrend bandwidth must be positive");
    const KernelSpec spec{KernelKind::Gaussian, bandwidth};
    const auto& times = data.grid().times();
    Matrix out = data.values();
    for (std::size_t k = 0; k < data.rows(); ++k) {
        const Vector w = kernel_weights(times[k], times, spec);
        out.row(static_cast<Eigen::Index>(k)) -= w.transpose() * data.values();
    }
    return TimeSeriesDataset(std::move(out), data.grid(), data.names());
}

TimeSeriesDataset log_returns(const TimeSeriesDataset& prices)
{
    const std::size_t n = prices.rows();
    if (n < 2) throw InvalidDataError("log returns need at least two price rows");
    const Matrix& y = prices.values();
    if ((y.array() <= 0.0).any()) throw DomainError("prices must be strictly positive");

    const auto m = static_cast<Eigen::Index>(n - 1);
    Matrix r(m, y.cols());
    for (Eigen::Index k = 0; k < m; ++k) r.row(k) = (y.row(k + 1).array() / y.row(k).array()).log().matrix();
    return TimeSeriesDataset(std::move(r), TimeGrid::uniform(n - 1), prices.names());
}

TimeSeriesDataset standardize(const TimeSeriesDataset& data)
{
    const auto n = static_cast<double>(data.rows());
    if (data.rows() < 2) throw InvalidDataError("standardize needs at least two rows");
    Matrix out = data.values();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double mean = out.col(j).mean();
        const double var = (out.col(j).array() - mean).square().sum() / (n - 1.0);
        if (!(var > 0.0)) {
            const auto& name = data.names()[static_cast<std::size_t>(j)];
            throw DegenerateVariableError("column '" + name + "' has zero variance", name);
        }
        out.col(j) /= std::sqrt(var);
    }
    return TimeSeriesDataset(std::move(out), data.grid(), data.names());
}

}  // namespace loggle
