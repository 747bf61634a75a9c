#include "loggle/metrics.hpp"

#include "loggle/errors.hpp"

#include <cmath>

namespace loggle {

double kl_divergence(const Matrix& estimate, const Matrix& truth)
{
    Eigen::LLT<Matrix> lt(truth);
    Eigen::LLT<Matrix> le(estimate);
    if (lt.info() != Eigen::Success || le.info() != Eigen::Success) {
        throw DomainError("KL divergence needs positive-definite matrices");
    }
    auto logdet = [](const Eigen::LLT<Matrix>& llt) {
        return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    };
    const double trace = lt.solve(estimate).trace();
    return trace - (logdet(le) - logdet(lt)) - static_cast<double>(truth.rows());
}

double f1_score(double fdr, double power)
{
    const double precision = 1.0 - fdr;
    const double denom = precision + power;
    return denom > 0.0 ? 2.0 * precision * power / denom : 0.0;
}

MetricsReport compute_metrics(const std::vector<EdgeSet>& truth,
                              const std::vector<EdgeSet>& estimates,
                              const std::vector<double>& times,
                              const std::vector<Matrix>& true_precisions,
                              const std::vector<Matrix>& precisions)
{
    const std::size_t k = times.size();
    if (truth.size() != k || estimates.size() != k) throw InvalidDataError("metrics inputs must align with fit times");
    if (k == 0) throw InvalidDataError("metrics need at least one fit time");
    MetricsReport rep;
    double fdr_sum = 0.0;
    double power_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double hits = static_cast<double>(set_intersection(truth[i], estimates[i]).size());
        if (estimates[i].empty()) {
            rep.empty_estimate_times.push_back(times[i]);
        } else {
            fdr_sum += 1.0 - hits / static_cast<double>(estimates[i].size());
        }
        if (truth[i].empty()) {
            rep.empty_truth_times.push_back(times[i]);
            power_sum += 1.0;
        } else {
            power_sum += hits / static_cast<double>(truth[i].size());
        }
    }
    rep.fdr = fdr_sum / static_cast<double>(k);
    rep.power = power_sum / static_cast<double>(k);
    rep.f1 = f1_score(rep.fdr, rep.power);

    if (!precisions.empty()) {
        if (precisions.size() != k || true_precisions.size() != k) {
            throw InvalidDataError("precision estimates must align with fit times");
        }
        double kl = 0.0;
        for (std::size_t i = 0; i < k; ++i) kl += kl_divergence(precisions[i], true_precisions[i]);
        rep.kl = kl / static_cast<double>(k);
    }
    return rep;
}

MetricsReport compute_metrics(const SimulationModel& model,
                              const std::vector<EdgeSet>& estimates,
                              const std::vector<Matrix>& precisions,
                              const std::vector<double>& times)
{
    std::vector<EdgeSet> truth;
    std::vector<Matrix> omegas;
    for (double t : times) {
        truth.push_back(model.edges(t));
        if (!precisions.empty()) omegas.push_back(model.precision(t));
    }
    return compute_metrics(truth, estimates, times, omegas, precisions);
}

}  // namespace loggle
