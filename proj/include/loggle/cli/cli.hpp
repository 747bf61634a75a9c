#pragma once

#include "loggle/errors.hpp"
#include "loggle/pipeline.hpp"
#include "loggle/simulation.hpp"
#include "loggle/tuning.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace loggle::cli {

/// Process exit codes. Stable: scripts depend on them.
enum ExitCode : int
{
    kOk = 0,
    kUnexpected = 1,
    kConfigError = 2,
    kDataError = 3,
    kNonConvergence = 4,
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

inline constexpr int kSchemaVersion = 1;

struct BenchSettings
{
    GeneratorKind generator = GeneratorKind::TimeVarying;
    Index p = 30;
    std::size_t n = 300;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<Method> methods = {Method::Loggle, Method::Kernel, Method::Invar};
    /// K evenly spaced interior fit times k/(K+1).
    std::size_t fit_time_count = 9;
    /// Fresh seeds tried when a generated model is not positive definite on the grid.
    int max_retries = 1000;
};

/// Everything a run needs. Loaded from a JSON file (comments allowed), then overridden by flags.
struct RunConfig
{
    FitConfig fit;
    /// When set, fit at K evenly spaced interior times k/(K+1) instead of fit.fit_times.
    std::optional<std::size_t> fit_time_count;
    bool detrend = false;
    /// Mean-smoothing bandwidth; unset means the covariance bandwidth (smallest h when tuning).
    std::optional<double> detrend_h;
    bool standardize = false;
    TuningGrid tuning;
    BenchSettings bench;

    nlohmann::json to_json() const;
};

/// Merges a JSON document into `config`. Unknown keys and wrong types raise ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// k/(K+1), k = 1..K.
std::vector<double> interior_times(std::size_t count);

/// SHA-256 of a file as lowercase hex.
std::string sha256_file(const std::string& path);

struct OutputFile
{
    std::string name;
    std::string sha256;
};

/// Writes edges.json, precision.csv and diagnostics.json for a fitted path (covariance-scale weights).
std::vector<OutputFile> write_path_outputs(const std::string& dir, const GraphPath& path);

/// cv_scores.csv (t, h, d, lambda, fold, score, edges, pass) and selection.json.
std::vector<OutputFile> write_cv_outputs(const std::string& dir, const CvResult& cv);

/// Per-time edge counts and, when labels are given, the within-label share.
OutputFile write_edge_counts(const std::string& dir, const GraphPath& path, const std::map<std::string, std::string>* labels);

struct ManifestInput
{
    std::string role;
    std::string path;
};

/// manifest.json: schema version, software version, command, config echo, input and output digests.
void write_manifest(const std::string& dir,
                    const std::string& command,
                    const nlohmann::json& config,
                    const std::vector<ManifestInput>& inputs,
                    std::vector<OutputFile> outputs,
                    const nlohmann::json& extra = nlohmann::json::object());

struct BenchRow
{
    Method method = Method::Loggle;
    Index p = 0;
    std::uint64_t seed = 0;
    double fdr = 0.0;
    double power = 0.0;
    double f1 = 0.0;
    double kl = 0.0;
    std::int64_t runtime_ms = 0;
};

/// Simulation protocol: for each seed, generate (retrying on non-PD models with unused seeds),
/// sample, tune each method by cross-validation and score it. `log` receives progress lines.
std::vector<BenchRow> run_bench(const RunConfig& config, std::ostream* log);
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

/// Generates a model that is positive definite on the simulation grid, starting at `seed`
/// and moving to seed+1, ... ; `skip` lists seeds that must not be used.
SimulationModel generate_model(GeneratorKind kind,
                               Index p,
                               std::size_t n,
                               std::uint64_t seed,
                               int max_retries,
                               const std::vector<std::uint64_t>& skip = {},
                               std::ostream* log = nullptr);

/// Entry point for the `loggle` executable.
int run(int argc, char** argv);

}  // namespace loggle::cli
