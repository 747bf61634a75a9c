#include "loggle/kernel.hpp"

#include "loggle/errors.hpp"

#include <cmath>
#include <sstream>

namespace loggle {

EmptyWindowError::EmptyWindowError(double t, double h)
    : Error([&] {
          std::ostringstream os;
          os << "no kernel mass at t=" << t << " with bandwidth h=" << h;
          return os.str();
      }()),
      time_(t),
      bandwidth_(h)
{}

double kernel_value(KernelKind kind, double scaled_distance)
{
    switch (kind) {
    case KernelKind::Epanechnikov: {
        const double u2 = scaled_distance * scaled_distance;
        return u2 <= 1.0 ? 0.75 * (1.0 - u2) : 0.0;
    }
    case KernelKind::Gaussian:
        // constant factor cancels in the normalisation
        return std::exp(-0.5 * scaled_distance * scaled_distance);
    }
    return 0.0;
}

Vector kernel_weights(double t, std::span<const double> times, const KernelSpec& spec)
{
    if (!(spec.bandwidth > 0.0)) throw ParameterError("kernel bandwidth must be positive");
    Vector w(static_cast<Eigen::Index>(times.size()));
    double total = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
        const double k = kernel_value(spec.kind, (times[j] - t) / spec.bandwidth);
        w[static_cast<Eigen::Index>(j)] = k;
        total += k;
    }
    if (!(total > 0.0)) throw EmptyWindowError(t, spec.bandwidth);
    return w / total;
}

Neighborhood make_neighborhood(double center_time, double width, std::span<const double> candidate_times)
{
    if (!(width >= 0.0)) throw ParameterError("neighbourhood width must be non-negative");
    Neighborhood nbhd{center_time, width, {}};
    bool has_center = false;
    for (double t : candidate_times) {
        if (std::abs(t - center_time) <= width + 1e-12) {
            nbhd.member_times.push_back(t);
            if (t == center_time) has_center = true;
        }
    }
    if (!has_center) {
        auto it = nbhd.member_times.begin();
        while (it != nbhd.member_times.end() && *it < center_time) ++it;
        nbhd.member_times.insert(it, center_time);
    }
    return nbhd;
}

SmoothedMatrixSequence SmoothedMatrixSequence::restrict_to(std::span<const Index> variables) const
{
    const auto q = static_cast<Eigen::Index>(variables.size());
    SmoothedMatrixSequence out;
    out.times = times;
    out.matrices.reserve(matrices.size());
    for (const auto& m : matrices) {
        Matrix sub(q, q);
        for (Eigen::Index a = 0; a < q; ++a) {
            for (Eigen::Index b = 0; b < q; ++b) {
                sub(a, b) = m(static_cast<Eigen::Index>(variables[a]), static_cast<Eigen::Index>(variables[b]));
            }
        }
        out.matrices.push_back(std::move(sub));
    }
    return out;
}

Matrix smoothed_covariance(const TimeSeriesDataset& data, double t, const KernelSpec& spec, std::span<const Index> rows)
{
    const auto& all_times = data.grid().times();
    const auto p = static_cast<Eigen::Index>(data.cols());
    Matrix sigma = Matrix::Zero(p, p);

    if (rows.empty()) {
        const Vector w = kernel_weights(t, all_times, spec);
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            if (w[j] == 0.0) continue;
            const auto x = data.values().row(j).transpose();
            sigma.selfadjointView<Eigen::Lower>().rankUpdate(x, w[j]);
        }
    } else {
        std::vector<double> sub_times;
        sub_times.reserve(rows.size());
        for (Index r : rows) sub_times.push_back(all_times[r]);
        const Vector w = kernel_weights(t, sub_times, spec);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const double wj = w[static_cast<Eigen::Index>(j)];
            if (wj == 0.0) continue;
            const auto x = data.values().row(static_cast<Eigen::Index>(rows[j])).transpose();
            sigma.selfadjointView<Eigen::Lower>().rankUpdate(x, wj);
        }
    }
    sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();
    return sigma;
}

Vector to_correlation(Matrix& sigma, const std::vector<std::string>* names)
{
    Vector sd = sigma.diagonal();
    for (Eigen::Index u = 0; u < sd.size(); ++u) {
        if (!(sd[u] > 0.0)) {
            std::string name = names ? (*names)[static_cast<std::size_t>(u)] : "V" + std::to_string(u + 1);
            throw DegenerateVariableError("variable '" + name + "' has zero smoothed variance", name);
        }
        sd[u] = std::sqrt(sd[u]);
    }
    const Vector inv = sd.cwiseInverse();
    sigma = inv.asDiagonal() * sigma * inv.asDiagonal();
    sigma.diagonal().setOnes();
    return sd;
}

SmoothedMatrixSequence smoothed_covariances(const TimeSeriesDataset& data,
                                            const Neighborhood& nbhd,
                                            const KernelSpec& spec,
                                            bool as_correlation,
                                            std::span<const Index> rows)
{
    SmoothedMatrixSequence out;
    out.times = nbhd.member_times;
    out.matrices.reserve(nbhd.member_times.size());
    for (double t : nbhd.member_times) {
        Matrix sigma = smoothed_covariance(data, t, spec, rows);
        if (as_correlation) to_correlation(sigma, &data.names());
        out.matrices.push_back(std::move(sigma));
    }
    return out;
}

}  // namespace loggle
