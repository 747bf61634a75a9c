#include "loggle/cli/cli.hpp"

#include "loggle/csv.hpp"
#include "loggle/metrics.hpp"
#include "loggle/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

namespace loggle::cli {

SimulationModel generate_model(GeneratorKind kind,
                               Index p,
                               std::size_t n,
                               std::uint64_t seed,
                               int max_retries,
                               const std::vector<std::uint64_t>& skip,
                               std::ostream* log)
{
    const auto grid = simulation_grid(n).times();
    std::uint64_t s = seed;
    for (int attempt = 0; attempt <= max_retries; ++s) {
        if (s != seed && std::find(skip.begin(), skip.end(), s) != skip.end()) continue;
        ++attempt;
        auto model = kind == GeneratorKind::TimeVarying ? simulate_time_varying(p, s) : simulate_time_invariant(p, s);
        try {
            model.check_positive_definite(grid);
            if (s != seed && log) *log << "seed " << seed << ": using seed " << s << " (earlier draws not positive definite)\n";
            return model;
        } catch (const GenerationError&) {
        }
    }
    throw GenerationError("no positive-definite model within " + std::to_string(max_retries) + " retries from seed " +
                              std::to_string(seed),
                          0.0);
}

std::vector<BenchRow> run_bench(const RunConfig& config, std::ostream* log)
{
    const BenchSettings& b = config.bench;
    if (b.seeds.empty() || b.methods.empty()) throw ConfigError("bench needs at least one seed and one method");
    if (b.fit_time_count == 0) throw ConfigError("bench needs at least one fit time");
    config.tuning.validate();
    const std::vector<double> fit_times = interior_times(b.fit_time_count);
    const bool deterministic = deterministic_mode();

    std::vector<BenchRow> rows;
    std::vector<std::uint64_t> used = b.seeds;
    for (std::uint64_t seed : b.seeds) {
        const SimulationModel model = generate_model(b.generator, b.p, b.n, seed, b.max_retries, used, log);
        used.push_back(model.seed());
        // simulated data have mean zero, so no detrending
        const TimeSeriesDataset data = sample_observations(model, b.n);

        for (Method method : b.methods) {
            FitConfig base = config.fit;
            base.method = method;
            base.fit_times = fit_times;
            const auto start = std::chrono::steady_clock::now();
            const TunedFit tuned = fit_with_tuning(data, config.tuning, base);
            const auto elapsed = std::chrono::steady_clock::now() - start;

            std::vector<EdgeSet> estimates;
            std::vector<Matrix> precisions;
            bool complete = true;
            for (const auto& f : tuned.path.fits) {
                estimates.push_back(f.ok ? f.edges : EdgeSet(b.p));
                if (f.ok) {
                    precisions.push_back(f.covariance_precision());
                } else {
                    complete = false;
                    if (log) *log << "seed " << model.seed() << " " << method_name(method) << " t=" << f.time << ": " << f.error << '\n';
                }
            }
            const MetricsReport m = compute_metrics(model, estimates, complete ? precisions : std::vector<Matrix>{}, fit_times);

            BenchRow row;
            row.method = method;
            row.p = b.p;
            row.seed = model.seed();
            row.fdr = m.fdr;
            row.power = m.power;
            row.f1 = m.f1;
            row.kl = m.kl;
            row.runtime_ms = deterministic ? 0 : std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
            rows.push_back(row);
            if (log) {
                *log << "seed " << row.seed << " " << method_name(method) << ": f1 " << row.f1 << " kl " << row.kl << " ("
                     << row.runtime_ms << " ms)\n";
            }
        }
    }
    return rows;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidDataError("cannot write '" + path + "'");
    out << "method,p,seed,fdr,power,f1,kl,runtime_ms\n";
    for (const auto& r : rows) {
        out << method_name(r.method) << ',' << r.p << ',' << r.seed << ',' << format_double(r.fdr) << ','
            << format_double(r.power) << ',' << format_double(r.f1) << ',' << format_double(r.kl) << ',' << r.runtime_ms
            << '\n';
    }
    if (!out) throw InvalidDataError("failed writing '" + path + "'");
}

}  // namespace loggle::cli
