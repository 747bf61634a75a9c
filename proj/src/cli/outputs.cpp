#include "loggle/cli/cli.hpp"

#include "loggle/csv.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#ifndef LOGGLE_VERSION
#define LOGGLE_VERSION "0.0.0"
#endif

namespace loggle::cli {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidDataError("cannot write '" + p.string() + "'");
    return out;
}

// JSON cannot carry inf/nan: those become null.
json number(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

OutputFile finish(const std::filesystem::path& p)
{
    return {p.filename().string(), sha256_file(p.string())};
}

void dump(const std::filesystem::path& p, const json& j)
{
    auto out = open_out(p);
    out << j.dump(2) << '\n';
}

}  // namespace

std::string sha256_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidDataError("cannot read '" + path + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

std::vector<OutputFile> write_path_outputs(const std::string& dir, const GraphPath& path)
{
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);

    json edges = json::array();
    json diag = json::array();
    auto prec = open_out(root / "precision.csv");
    prec << "time,row,col,value\n";
    for (const auto& f : path.fits) {
        json e{{"time", f.time}, {"d", f.d}, {"lambda", f.lambda}, {"ok", f.ok}, {"edges", json::array()}};
        if (f.ok) {
            // weights and triplets on the covariance scale of the (preprocessed) input
            const Matrix omega = f.covariance_precision();
            for (const auto& x : f.edges) {
                e["edges"].push_back({{"u", path.names[x.u]},
                                      {"v", path.names[x.v]},
                                      {"weight", omega(static_cast<Eigen::Index>(x.u), static_cast<Eigen::Index>(x.v))}});
            }
            for (Eigen::Index u = 0; u < omega.rows(); ++u) {
                for (Eigen::Index v = u; v < omega.cols(); ++v) {
                    if (omega(u, v) == 0.0) continue;
                    prec << format_double(f.time) << ',' << u + 1 << ',' << v + 1 << ',' << format_double(omega(u, v))
                         << '\n';
                }
            }
        }
        edges.push_back(std::move(e));
        diag.push_back({{"time", f.time},
                        {"ok", f.ok},
                        {"non_converged", f.non_converged},
                        {"error", f.error},
                        {"neighborhood_size", f.neighborhood_size},
                        {"block_count", f.block_count},
                        {"largest_block", f.largest_block},
                        {"solver_edges", f.solver_edges.size()},
                        {"edges", f.edges.size()},
                        {"admm",
                         {{"iterations", f.admm.iterations},
                          {"converged", f.admm.converged},
                          {"primal_residual", number(f.admm.primal_residual)},
                          {"dual_residual", number(f.admm.dual_residual)},
                          {"primal_tolerance", number(f.admm.primal_tolerance)},
                          {"dual_tolerance", number(f.admm.dual_tolerance)}}},
                        {"refit_sweeps", f.refit_sweeps}});
    }
    prec.close();
    dump(root / "edges.json",
         {{"schema_version", kSchemaVersion}, {"method", method_name(path.method)}, {"variables", path.names}, {"times", edges}});
    dump(root / "diagnostics.json", {{"schema_version", kSchemaVersion}, {"times", diag}});
    return {finish(root / "edges.json"), finish(root / "precision.csv"), finish(root / "diagnostics.json")};
}

std::vector<OutputFile> write_cv_outputs(const std::string& dir, const CvResult& cv)
{
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    {
        auto out = open_out(root / "cv_scores.csv");
        out << "t,h,d,lambda,fold,score,edges,pass\n";
        for (const auto& r : cv.records) {
            out << format_double(r.time) << ',' << format_double(r.h) << ',' << format_double(r.d) << ','
                << format_double(r.lambda) << ',' << r.fold + 1 << ',' << format_double(r.score) << ',' << r.edges << ','
                << (r.coarse ? "coarse" : "fine") << '\n';
        }
    }
    json per_time = json::array();
    for (std::size_t k = 0; k < cv.fit_times.size(); ++k) {
        per_time.push_back({{"time", cv.fit_times[k]},
                            {"d", cv.selected[k].d},
                            {"lambda", cv.selected[k].lambda},
                            {"score", number(cv.selected[k].score)},
                            {"voted_edges", cv.voted[k].size()}});
    }
    json h_scores = json::array();
    for (std::size_t i = 0; i < cv.grid.h.size(); ++i) {
        h_scores.push_back({{"h", cv.grid.h[i]}, {"score", number(cv.h_scores[i])}, {"refined", static_cast<bool>(cv.h_refined[i])}});
    }
    dump(root / "selection.json", {{"schema_version", kSchemaVersion},
                                   {"method", method_name(cv.method)},
                                   {"h", cv.selected_h},
                                   {"h_scores", h_scores},
                                   {"folds", cv.grid.folds},
                                   {"vote_threshold", cv.grid.vote_threshold},
                                   {"times", per_time}});
    return {finish(root / "cv_scores.csv"), finish(root / "selection.json")};
}

OutputFile write_edge_counts(const std::string& dir, const GraphPath& path, const std::map<std::string, std::string>* labels)
{
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    auto out = open_out(root / "edge_counts.csv");
    out << "time,edges";
    if (labels) out << ",within_group,within_proportion";
    out << '\n';
    for (const auto& f : path.fits) {
        out << format_double(f.time) << ',' << f.edges.size();
        if (labels) {
            std::size_t within = 0;
            for (const auto& e : f.edges) {
                const auto a = labels->find(path.names[e.u]);
                const auto b = labels->find(path.names[e.v]);
                if (a != labels->end() && b != labels->end() && a->second == b->second) ++within;
            }
            const double share = f.edges.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(f.edges.size());
            out << ',' << within << ',' << format_double(share);
        }
        out << '\n';
    }
    out.close();
    return finish(root / "edge_counts.csv");
}

void write_manifest(const std::string& dir,
                    const std::string& command,
                    const json& config,
                    const std::vector<ManifestInput>& inputs,
                    std::vector<OutputFile> outputs,
                    const json& extra)
{
    json in = json::array();
    for (const auto& i : inputs) {
        in.push_back({{"role", i.role}, {"path", i.path}, {"sha256", sha256_file(i.path)}});
    }
    json out = json::array();
    for (const auto& o : outputs) out.push_back({{"file", o.name}, {"sha256", o.sha256}});
    json m{{"schema_version", kSchemaVersion},
           {"software", {{"name", "loggle"}, {"version", LOGGLE_VERSION}}},
           {"command", command},
           {"config", config},
           {"inputs", in},
           {"outputs", out}};
    for (const auto& [k, v] : extra.items()) m[k] = v;
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    dump(root / "manifest.json", m);
}

}  // namespace loggle::cli
