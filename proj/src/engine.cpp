#include "loggle/engine.hpp"

#include "loggle/errors.hpp"
#include "loggle/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace loggle {

const char* method_name(Method m)
{
    switch (m) {
    case Method::Loggle: return "loggle";
    case Method::Kernel: return "kernel";
    case Method::Invar: return "invar";
    }
    return "?";
}

Method parse_method(const std::string& s)
{
    if (s == "loggle") return Method::Loggle;
    if (s == "kernel") return Method::Kernel;
    if (s == "invar") return Method::Invar;
    throw ParameterError("unknown method '" + s + "' (expected loggle, kernel or invar)");
}

SmoothedCache::SmoothedCache(const TimeSeriesDataset& data,
                             std::span<const Index> rows,
                             const KernelSpec& kernel,
                             bool as_correlation,
                             std::vector<double> times,
                             unsigned threads)
    : times_(std::move(times))
{
    std::sort(times_.begin(), times_.end());
    times_.erase(std::unique(times_.begin(), times_.end()), times_.end());
    const std::size_t n = times_.size();
    sigmas_.resize(n);
    scales_.resize(n);
    errors_.resize(n);
    const auto p = static_cast<Eigen::Index>(data.cols());
    parallel_for(n, threads, [&](std::size_t i) {
        try {
            sigmas_[i] = smoothed_covariance(data, times_[i], kernel, rows);
            scales_[i] = as_correlation ? to_correlation(sigmas_[i], &data.names()) : Vector::Ones(p);
        } catch (const Error&) {
            errors_[i] = std::current_exception();
        }
    });
}

std::size_t SmoothedCache::index(double t) const
{
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.end() || *it != t) throw InvalidDataError("no smoothed matrix cached at t=" + std::to_string(t));
    return static_cast<std::size_t>(it - times_.begin());
}

const Matrix& SmoothedCache::sigma(double t) const
{
    const auto i = index(t);
    if (errors_[i]) std::rethrow_exception(errors_[i]);
    return sigmas_[i];
}

const Vector& SmoothedCache::scale(double t) const
{
    const auto i = index(t);
    if (errors_[i]) std::rethrow_exception(errors_[i]);
    return scales_[i];
}

SmoothedMatrixSequence SmoothedCache::sequence(std::span<const double> times) const
{
    SmoothedMatrixSequence out;
    out.times.assign(times.begin(), times.end());
    out.matrices.reserve(times.size());
    for (double t : times) out.matrices.push_back(sigma(t));
    return out;
}

PathEngine::PathEngine(std::vector<double> observation_times, std::vector<double> fit_times, Method method)
    : observation_times_(std::move(observation_times)), fit_times_(std::move(fit_times)), method_(method)
{
    if (observation_times_.empty()) throw InvalidDataError("no observation times");
    std::sort(observation_times_.begin(), observation_times_.end());
    // repeated observation times stay repeated; off-grid fit times are added once each
    shared_times_ = observation_times_;
    std::vector<double> extra;
    for (double t : fit_times_) {
        if (!std::binary_search(observation_times_.begin(), observation_times_.end(), t)) extra.push_back(t);
    }
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    for (double t : extra) shared_times_.insert(std::upper_bound(shared_times_.begin(), shared_times_.end(), t), t);
}

Neighborhood PathEngine::neighborhood(std::size_t k, double d) const
{
    const double center = fit_times_.at(k);
    if (method_ == Method::Kernel) d = 0.0;
    if (!(d >= 0.0)) throw ParameterError("window width d must be non-negative");
    const double reach = std::max(std::abs(observation_times_.front() - center),
                                  std::abs(observation_times_.back() - center));
    if (method_ == Method::Invar || reach <= d + 1e-12) {
        return Neighborhood{center, d, shared_times_};
    }
    return make_neighborhood(center, d, observation_times_);
}

std::vector<double> PathEngine::required_times(const std::vector<CellRequest>& requests) const
{
    std::vector<double> out;
    for (const auto& r : requests) {
        const auto nb = neighborhood(r.time_index, r.d);
        out.insert(out.end(), nb.member_times.begin(), nb.member_times.end());
    }
    out.insert(out.end(), fit_times_.begin(), fit_times_.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

struct Member
{
    std::size_t request;
    std::size_t center;                 // position of the fit time inside the window
    std::vector<std::size_t> order;     // lambda indices of the request, decreasing lambda
    std::size_t next = 0;               // next entry of `order` to evaluate
    bool stopped = false;
};

struct Chain
{
    std::vector<double> times;
    std::vector<Member> members;
    std::vector<double> lambdas;  // union, decreasing
};

}  // namespace

std::vector<std::vector<CellOutcome>> PathEngine::run(const SmoothedCache& cache,
                                                      const std::vector<CellRequest>& requests,
                                                      const EngineSettings& settings) const
{
    std::vector<std::vector<CellOutcome>> out(requests.size());
    std::vector<Chain> chains;
    std::map<std::vector<double>, std::size_t> by_window;

    for (std::size_t r = 0; r < requests.size(); ++r) {
        const auto& req = requests[r];
        out[r].resize(req.lambdas.size());
        Neighborhood nb = neighborhood(req.time_index, req.d);
        auto [it, inserted] = by_window.try_emplace(nb.member_times, chains.size());
        if (inserted) chains.push_back(Chain{nb.member_times, {}, {}});
        Chain& chain = chains[it->second];

        Member m;
        m.request = r;
        const double center = fit_times_[req.time_index];
        m.center = static_cast<std::size_t>(
            std::find(chain.times.begin(), chain.times.end(), center) - chain.times.begin());
        m.order.resize(req.lambdas.size());
        for (std::size_t l = 0; l < m.order.size(); ++l) m.order[l] = l;
        std::stable_sort(m.order.begin(), m.order.end(),
                         [&](std::size_t a, std::size_t b) { return req.lambdas[a] > req.lambdas[b]; });
        chain.lambdas.insert(chain.lambdas.end(), req.lambdas.begin(), req.lambdas.end());
        chain.members.push_back(std::move(m));
    }
    for (auto& c : chains) {
        std::sort(c.lambdas.begin(), c.lambdas.end(), std::greater<>());
        c.lambdas.erase(std::unique(c.lambdas.begin(), c.lambdas.end()), c.lambdas.end());
    }

    parallel_for(chains.size(), settings.threads, [&](std::size_t ci) {
        Chain& chain = chains[ci];
        auto fail_all = [&](const std::string& msg) {
            for (auto& m : chain.members) {
                for (auto& cell : out[m.request]) {
                    cell.status = CellStatus::Failed;
                    cell.error = msg;
                }
            }
        };
        SmoothedMatrixSequence seq;
        try {
            seq = cache.sequence(chain.times);
        } catch (const Error& e) {
            fail_all(e.what());
            return;
        }

        AdmmState warm;
        for (double lambda : chain.lambdas) {
            std::vector<Member*> due;
            bool any_left = false;
            for (auto& m : chain.members) {
                if (m.stopped || m.next >= m.order.size()) continue;
                any_left = true;
                if (requests[m.request].lambdas[m.order[m.next]] == lambda) due.push_back(&m);
            }
            if (!any_left) break;
            if (due.empty()) continue;

            BlockwiseFit fit;
            std::string error;
            AdmmReport failed_report;
            try {
                fit = solve_blockwise(seq, lambda, settings.solver, settings.admm, &warm);
            } catch (const NonConvergenceError& e) {
                error = e.what();
                failed_report = e.report();
            } catch (const Error& e) {
                error = e.what();
            }

            for (Member* m : due) {
                const auto& req = requests[m->request];
                // the same lambda may be listed more than once for one request
                while (m->next < m->order.size() && req.lambdas[m->order[m->next]] == lambda) {
                    CellOutcome& cell = out[m->request][m->order[m->next]];
                    cell.neighborhood_size = chain.times.size();
                    if (error.empty()) {
                        cell.status = CellStatus::Ok;
                        cell.edges = fit.edges_at(m->center);
                        cell.report = fit.report;
                        cell.block_count = fit.partition.size();
                        cell.largest_block = fit.partition.largest();
                    } else {
                        cell.status = CellStatus::Failed;
                        cell.error = error;
                        cell.report = failed_report;
                    }
                    ++m->next;
                }
                if (error.empty() && settings.edge_cap && fit.edges_at(m->center).size() > *settings.edge_cap) {
                    m->stopped = true;
                }
            }
        }
    });
    return out;
}

}  // namespace loggle
