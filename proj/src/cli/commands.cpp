#include "loggle/cli/cli.hpp"

#include "loggle/csv.hpp"
#include "loggle/dataset.hpp"
#include "loggle/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace loggle::cli {

using nlohmann::json;

namespace {

// Flags shared by fit, tune and bench. Unset flags leave the config file values alone.
struct Overrides
{
    std::string config_path;
    std::optional<std::string> method;
    std::optional<std::string> solver;
    std::optional<double> h;
    std::vector<double> d;
    std::vector<double> lambda;
    std::vector<double> fit_times;
    std::optional<std::size_t> fit_time_count;
    bool no_correlation = false;
    bool detrend = false;
    bool no_detrend = false;
    std::optional<double> detrend_h;
    bool standardize = false;
    std::optional<double> eps_abs;
    std::optional<double> eps_rel;
    std::optional<int> max_iter;
    std::optional<unsigned> threads;
    std::vector<double> h_grid;
    std::vector<double> d_grid;
    std::vector<double> lambda_grid;
    std::optional<std::size_t> folds;
    std::optional<double> vote_threshold;
    std::optional<std::size_t> coarse_keep;
};

void add_common(CLI::App* app, Overrides& o)
{
    app->add_option("--config", o.config_path, "JSON config file (comments allowed)");
    app->add_option("--method", o.method, "loggle, kernel or invar");
    app->add_option("--solver", o.solver, "likelihood or pseudo");
    app->add_option("--bandwidth", o.h, "kernel bandwidth h");
    app->add_option("--d", o.d, "window width, one value or one per fit time")->delimiter(',');
    app->add_option("--lambda", o.lambda, "penalty, one value or one per fit time")->delimiter(',');
    app->add_option("--fit-times", o.fit_times, "fit times in [0,1]")->delimiter(',');
    app->add_option("--fit-time-count", o.fit_time_count, "K evenly spaced interior fit times");
    app->add_flag("--no-correlation", o.no_correlation, "fit on smoothed covariances instead of correlations");
    app->add_flag("--detrend", o.detrend, "subtract a kernel estimate of the mean first");
    app->add_flag("--no-detrend", o.no_detrend, "skip mean removal");
    app->add_option("--detrend-h", o.detrend_h, "mean-smoothing bandwidth");
    app->add_flag("--standardize", o.standardize, "scale columns to unit sd before fitting");
    app->add_option("--eps-abs", o.eps_abs);
    app->add_option("--eps-rel", o.eps_rel);
    app->add_option("--max-iter", o.max_iter);
    app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    app->add_option("--h-grid", o.h_grid)->delimiter(',');
    app->add_option("--d-grid", o.d_grid)->delimiter(',');
    app->add_option("--lambda-grid", o.lambda_grid)->delimiter(',');
    app->add_option("--folds", o.folds);
    app->add_option("--vote-threshold", o.vote_threshold);
    app->add_option("--coarse-keep", o.coarse_keep, "bandwidths kept after the coarse pass (0 = off)");
}

RunConfig build_config(const Overrides& o)
{
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    json doc = json::object();
    if (o.method) doc["method"] = *o.method;
    if (o.solver) doc["solver"] = *o.solver;
    if (o.h) doc["kernel"]["h"] = *o.h;
    if (!o.d.empty()) doc["d"] = o.d;
    if (!o.lambda.empty()) doc["lambda"] = o.lambda;
    if (!o.fit_times.empty()) doc["fit_times"] = o.fit_times;
    if (o.fit_time_count) doc["fit_times"] = {{"count", *o.fit_time_count}};
    if (o.no_correlation) doc["correlation"] = false;
    if (o.detrend) doc["detrend"]["enabled"] = true;
    if (o.no_detrend) doc["detrend"]["enabled"] = false;
    if (o.detrend_h) doc["detrend"]["h"] = *o.detrend_h;
    if (o.standardize) doc["standardize"] = true;
    if (o.eps_abs) doc["admm"]["eps_abs"] = *o.eps_abs;
    if (o.eps_rel) doc["admm"]["eps_rel"] = *o.eps_rel;
    if (o.max_iter) doc["admm"]["max_iter"] = *o.max_iter;
    if (o.threads) doc["threads"] = *o.threads;
    if (!o.h_grid.empty()) doc["tuning"]["h"] = o.h_grid;
    if (!o.d_grid.empty()) doc["tuning"]["d"] = o.d_grid;
    if (!o.lambda_grid.empty()) doc["tuning"]["lambda"] = o.lambda_grid;
    if (o.folds) doc["tuning"]["folds"] = *o.folds;
    if (o.vote_threshold) doc["tuning"]["vote_threshold"] = *o.vote_threshold;
    if (o.coarse_keep) doc["tuning"]["coarse_keep"] = *o.coarse_keep;
    apply_json(c, doc);
    if (c.fit_time_count) c.fit.fit_times = interior_times(*c.fit_time_count);
    try {
        c.fit.validate();
        c.tuning.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

TimeSeriesDataset preprocess(TimeSeriesDataset data, const RunConfig& c, double default_h)
{
    if (c.detrend) data = detrend(data, c.detrend_h.value_or(default_h));
    if (c.standardize) data = standardize(data);
    return data;
}

int path_status(const GraphPath& path)
{
    for (const auto& f : path.fits) {
        if (f.non_converged) return kNonConvergence;
    }
    for (const auto& f : path.fits) {
        if (!f.ok) {
            std::cerr << "warning: fit at t=" << f.time << " failed: " << f.error << '\n';
        }
    }
    return kOk;
}

void report_failures(const GraphPath& path)
{
    for (const auto& f : path.fits) {
        if (f.non_converged) std::cerr << "t=" << f.time << ": " << f.error << '\n';
    }
}

json run_info()
{
    return {{"deterministic", deterministic_mode()}};
}

// --- simulate -----------------------------------------------------------------------------

struct SimulateArgs
{
    std::string generator = "time-varying";
    Index p = 30;
    std::size_t n = 300;
    std::uint64_t seed = 1;
    int max_retries = 1000;
    std::string out;
    std::string truth_dir;
};

int cmd_simulate(const SimulateArgs& a)
{
    RunConfig c;
    apply_json(c, {{"bench", {{"generator", a.generator}}}});
    const SimulationModel model = generate_model(c.bench.generator, a.p, a.n, a.seed, a.max_retries, {}, &std::cerr);
    const TimeSeriesDataset data = sample_observations(model, a.n);
    const std::filesystem::path out(a.out);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_dataset_csv(a.out, data);
    if (!a.truth_dir.empty()) {
        std::filesystem::create_directories(a.truth_dir);
        json times = json::array();
        for (double t : data.grid().times()) {
            json pairs = json::array();
            for (const auto& e : model.edges(t)) pairs.push_back({data.names()[e.u], data.names()[e.v]});
            times.push_back({{"time", t}, {"edges", pairs}});
        }
        std::ofstream(std::filesystem::path(a.truth_dir) / "truth_edges.json", std::ios::binary)
            << json{{"schema_version", kSchemaVersion},
                    {"generator", a.generator},
                    {"p", a.p},
                    {"seed", model.seed()},
                    {"times", times}}
                   .dump(2)
            << '\n';
    }
    return kOk;
}

// --- fit ----------------------------------------------------------------------------------

int cmd_fit(const Overrides& o, const std::string& data_path, const std::string& out_dir)
{
    const RunConfig c = build_config(o);
    const TimeSeriesDataset data = preprocess(read_dataset_csv(data_path), c, c.fit.kernel.bandwidth);
    const GraphPath path = fit_path(data, c.fit);
    auto outputs = write_path_outputs(out_dir, path);
    write_manifest(out_dir, "fit", c.to_json(), {{"data", data_path}}, std::move(outputs), run_info());
    report_failures(path);
    return path_status(path);
}

// --- tune ---------------------------------------------------------------------------------

int cmd_tune(const Overrides& o,
             const std::string& data_path,
             const std::string& prices_path,
             const std::string& sectors_path,
             const std::string& out_dir)
{
    if (data_path.empty() == prices_path.empty()) throw ConfigError("tune needs exactly one of --data or --prices");
    RunConfig c = build_config(o);
    std::vector<ManifestInput> inputs;
    TimeSeriesDataset raw = [&] {
        if (!data_path.empty()) {
            inputs.push_back({"data", data_path});
            return read_dataset_csv(data_path);
        }
        inputs.push_back({"prices", prices_path});
        // price mode: returns, then mean removal unless switched off
        if (!o.no_detrend) c.detrend = true;
        return log_returns(read_dataset_csv(prices_path));
    }();
    const double min_h = *std::min_element(c.tuning.h.begin(), c.tuning.h.end());
    const TimeSeriesDataset data = preprocess(std::move(raw), c, min_h);

    std::map<std::string, std::string> labels;
    if (!sectors_path.empty()) {
        inputs.push_back({"sectors", sectors_path});
        labels = read_labels_csv(sectors_path);
    }

    const TunedFit tuned = fit_with_tuning(data, c.tuning, c.fit);
    auto outputs = write_path_outputs(out_dir, tuned.path);
    for (auto& f : write_cv_outputs(out_dir, tuned.cv)) outputs.push_back(std::move(f));
    outputs.push_back(write_edge_counts(out_dir, tuned.path, sectors_path.empty() ? nullptr : &labels));
    write_manifest(out_dir, "tune", c.to_json(), inputs, std::move(outputs), run_info());
    report_failures(tuned.path);
    return path_status(tuned.path);
}

// --- bench --------------------------------------------------------------------------------

struct BenchArgs
{
    std::optional<std::string> generator;
    std::optional<Index> p;
    std::optional<std::size_t> n;
    std::vector<std::string> seeds;
    std::vector<std::string> methods;
    std::optional<std::size_t> fit_times;
    std::string out;
    bool quiet = false;
};

// "3" or "1-10"
std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items)
{
    std::vector<std::uint64_t> out;
    for (const auto& s : items) {
        try {
            const auto dash = s.find('-');
            if (dash == std::string::npos) {
                out.push_back(std::stoull(s));
            } else {
                const auto lo = std::stoull(s.substr(0, dash));
                const auto hi = std::stoull(s.substr(dash + 1));
                if (hi < lo) throw ConfigError("empty seed range '" + s + "'");
                for (auto x = lo; x <= hi; ++x) out.push_back(x);
            }
        } catch (const std::logic_error&) {
            throw ConfigError("bad seed '" + s + "'");
        }
    }
    return out;
}

int cmd_bench(const Overrides& o, const BenchArgs& a)
{
    RunConfig c = build_config(o);
    json doc = json::object();
    if (a.generator) doc["bench"]["generator"] = *a.generator;
    if (a.p) doc["bench"]["p"] = *a.p;
    if (a.n) doc["bench"]["n"] = *a.n;
    if (!a.seeds.empty()) doc["bench"]["seeds"] = parse_seeds(a.seeds);
    if (!a.methods.empty()) doc["bench"]["methods"] = a.methods;
    if (a.fit_times) doc["bench"]["fit_times"] = *a.fit_times;
    apply_json(c, doc);
    const auto rows = run_bench(c, a.quiet ? nullptr : &std::cerr);
    const std::filesystem::path out(a.out);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_bench_csv(a.out, rows);
    return kOk;
}

}  // namespace

int run(int argc, char** argv)
{
    CLI::App app{"Local group graphical lasso: time-varying graphical models"};
    app.set_version_flag("--version", std::string(LOGGLE_VERSION));
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "draw a dataset from a synthetic model");
    simulate->add_option("--generator", sim.generator, "time-varying or time-invariant");
    simulate->add_option("--p", sim.p);
    simulate->add_option("--n", sim.n, "N: rows are t = 0, 1/N, ..., 1");
    simulate->add_option("--seed", sim.seed);
    simulate->add_option("--max-retries", sim.max_retries);
    simulate->add_option("--out", sim.out, "output CSV")->required();
    simulate->add_option("--truth", sim.truth_dir, "directory for truth_edges.json");

    Overrides fit_o;
    std::string fit_data, fit_out;
    auto* fit = app.add_subcommand("fit", "fit graphs at fixed tuning parameters");
    add_common(fit, fit_o);
    fit->add_option("--data", fit_data, "input CSV")->required();
    fit->add_option("--out", fit_out, "output directory")->required();

    Overrides tune_o;
    std::string tune_data, tune_prices, tune_sectors, tune_out;
    auto* tune = app.add_subcommand("tune", "cross-validated fit");
    add_common(tune, tune_o);
    tune->add_option("--data", tune_data, "input CSV");
    tune->add_option("--prices", tune_prices, "price CSV: converted to log returns and detrended");
    tune->add_option("--sectors", tune_sectors, "name,label CSV for within-group edge shares");
    tune->add_option("--out", tune_out, "output directory")->required();

    Overrides bench_o;
    BenchArgs bench_a;
    auto* bench = app.add_subcommand("bench", "simulation study: metrics per method and seed");
    add_common(bench, bench_o);
    bench->add_option("--generator", bench_a.generator, "time-varying or time-invariant");
    bench->add_option("--p", bench_a.p);
    bench->add_option("--n", bench_a.n);
    bench->add_option("--seeds", bench_a.seeds, "seeds or ranges, e.g. 1-10");
    bench->add_option("--methods", bench_a.methods)->delimiter(',');
    bench->add_option("--bench-fit-times", bench_a.fit_times, "K interior fit times");
    bench->add_option("--out", bench_a.out, "metrics CSV")->required();
    bench->add_flag("--quiet", bench_a.quiet, "no progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*fit) return cmd_fit(fit_o, fit_data, fit_out);
        if (*tune) return cmd_tune(tune_o, tune_data, tune_prices, tune_sectors, tune_out);
        if (*bench) return cmd_bench(bench_o, bench_a);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NonConvergenceError& e) {
        std::cerr << "solver did not converge: " << e.what() << '\n';
        return kNonConvergence;
    } catch (const InvalidDataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const DomainError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const DegenerateVariableError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const EmptyWindowError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const GenerationError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const InfeasibleError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUnexpected;
    }
    return kUnexpected;
}

}  // namespace loggle::cli
