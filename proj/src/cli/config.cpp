#include "loggle/cli/cli.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace loggle::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
    }
}

// A scalar or a list of numbers.
std::vector<double> number_list(const json& v, const std::string& what)
{
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError("'" + what + "' must be a number or a list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError("'" + what + "' must contain numbers only");
        out.push_back(x.get<double>());
    }
    return out;
}

KernelKind parse_kernel(const std::string& s)
{
    if (s == "epanechnikov") return KernelKind::Epanechnikov;
    if (s == "gaussian") return KernelKind::Gaussian;
    throw ConfigError("unknown kernel '" + s + "' (expected epanechnikov or gaussian)");
}

const char* kernel_name(KernelKind k)
{
    return k == KernelKind::Epanechnikov ? "epanechnikov" : "gaussian";
}

SolverKind parse_solver(const std::string& s)
{
    if (s == "likelihood") return SolverKind::Likelihood;
    if (s == "pseudo") return SolverKind::Pseudo;
    throw ConfigError("unknown solver '" + s + "' (expected likelihood or pseudo)");
}

GeneratorKind parse_generator(const std::string& s)
{
    if (s == "time-varying") return GeneratorKind::TimeVarying;
    if (s == "time-invariant") return GeneratorKind::TimeInvariant;
    throw ConfigError("unknown generator '" + s + "' (expected time-varying or time-invariant)");
}

Method method_from(const std::string& s)
{
    try {
        return parse_method(s);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

std::vector<double> interior_times(std::size_t count)
{
    std::vector<double> out;
    for (std::size_t k = 1; k <= count; ++k) out.push_back(static_cast<double>(k) / static_cast<double>(count + 1));
    return out;
}

void apply_json(RunConfig& c, const json& doc)
{
    check_keys(doc, "config", {"method", "solver", "kernel", "d", "lambda", "fit_times", "correlation", "detrend",
                               "standardize", "admm", "refit", "tuning", "bench", "threads"});
    if (doc.contains("method")) c.fit.method = method_from(get<std::string>(doc, "method", "config"));
    if (doc.contains("solver")) c.fit.solver = parse_solver(get<std::string>(doc, "solver", "config"));
    if (doc.contains("kernel")) {
        const auto& k = doc["kernel"];
        check_keys(k, "kernel", {"type", "h"});
        if (k.contains("type")) c.fit.kernel.kind = parse_kernel(get<std::string>(k, "type", "kernel"));
        if (k.contains("h")) c.fit.kernel.bandwidth = get<double>(k, "h", "kernel");
    }
    if (doc.contains("d")) c.fit.d = number_list(doc["d"], "d");
    if (doc.contains("lambda")) c.fit.lambda = number_list(doc["lambda"], "lambda");
    if (doc.contains("fit_times")) {
        const auto& f = doc["fit_times"];
        if (f.is_object()) {
            check_keys(f, "fit_times", {"count"});
            c.fit_time_count = get<std::size_t>(f, "count", "fit_times");
            c.fit.fit_times.clear();
        } else {
            c.fit.fit_times = number_list(f, "fit_times");
            c.fit_time_count.reset();
        }
    }
    if (doc.contains("correlation")) c.fit.as_correlation = get<bool>(doc, "correlation", "config");
    if (doc.contains("standardize")) c.standardize = get<bool>(doc, "standardize", "config");
    if (doc.contains("threads")) c.fit.threads = get<unsigned>(doc, "threads", "config");
    if (doc.contains("detrend")) {
        const auto& d = doc["detrend"];
        check_keys(d, "detrend", {"enabled", "h"});
        if (d.contains("enabled")) c.detrend = get<bool>(d, "enabled", "detrend");
        if (d.contains("h")) {
            if (d["h"].is_null()) {
                c.detrend_h.reset();
            } else {
                c.detrend_h = get<double>(d, "h", "detrend");
            }
        }
    }
    if (doc.contains("admm")) {
        const auto& a = doc["admm"];
        check_keys(a, "admm", {"rho", "alpha", "eps_abs", "eps_rel", "max_iter"});
        if (a.contains("rho")) {
            if (a["rho"].is_null()) {
                c.fit.admm.rho.reset();
            } else {
                c.fit.admm.rho = get<double>(a, "rho", "admm");
            }
        }
        if (a.contains("alpha")) c.fit.admm.alpha = get<double>(a, "alpha", "admm");
        if (a.contains("eps_abs")) c.fit.admm.eps_abs = get<double>(a, "eps_abs", "admm");
        if (a.contains("eps_rel")) c.fit.admm.eps_rel = get<double>(a, "eps_rel", "admm");
        if (a.contains("max_iter")) c.fit.admm.max_iter = get<int>(a, "max_iter", "admm");
    }
    if (doc.contains("refit")) {
        const auto& r = doc["refit"];
        check_keys(r, "refit", {"tol", "max_sweeps"});
        if (r.contains("tol")) c.fit.refit.tol = get<double>(r, "tol", "refit");
        if (r.contains("max_sweeps")) c.fit.refit.max_sweeps = get<int>(r, "max_sweeps", "refit");
    }
    if (doc.contains("tuning")) {
        const auto& t = doc["tuning"];
        check_keys(t, "tuning", {"h", "d", "lambda", "folds", "vote_threshold", "edge_cap_multiplier", "coarse_keep",
                                 "coarse_stride", "refit_on_vote"});
        if (t.contains("h")) c.tuning.h = number_list(t["h"], "tuning.h");
        if (t.contains("d")) c.tuning.d = number_list(t["d"], "tuning.d");
        if (t.contains("lambda")) c.tuning.lambda = number_list(t["lambda"], "tuning.lambda");
        if (t.contains("folds")) c.tuning.folds = get<std::size_t>(t, "folds", "tuning");
        if (t.contains("vote_threshold")) c.tuning.vote_threshold = get<double>(t, "vote_threshold", "tuning");
        if (t.contains("edge_cap_multiplier")) {
            c.tuning.edge_cap_multiplier = get<double>(t, "edge_cap_multiplier", "tuning");
        }
        if (t.contains("coarse_keep")) c.tuning.coarse_keep = get<std::size_t>(t, "coarse_keep", "tuning");
        if (t.contains("coarse_stride")) c.tuning.coarse_stride = get<std::size_t>(t, "coarse_stride", "tuning");
        if (t.contains("refit_on_vote")) c.tuning.refit_on_vote = get<bool>(t, "refit_on_vote", "tuning");
    }
    if (doc.contains("bench")) {
        const auto& b = doc["bench"];
        check_keys(b, "bench", {"generator", "p", "n", "seeds", "methods", "fit_times", "max_retries"});
        if (b.contains("generator")) c.bench.generator = parse_generator(get<std::string>(b, "generator", "bench"));
        if (b.contains("p")) c.bench.p = get<Index>(b, "p", "bench");
        if (b.contains("n")) c.bench.n = get<std::size_t>(b, "n", "bench");
        if (b.contains("seeds")) c.bench.seeds = get<std::vector<std::uint64_t>>(b, "seeds", "bench");
        if (b.contains("methods")) {
            c.bench.methods.clear();
            for (const auto& m : get<std::vector<std::string>>(b, "methods", "bench")) c.bench.methods.push_back(method_from(m));
        }
        if (b.contains("fit_times")) c.bench.fit_time_count = get<std::size_t>(b, "fit_times", "bench");
        if (b.contains("max_retries")) c.bench.max_retries = get<int>(b, "max_retries", "bench");
    }
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    RunConfig c;
    apply_json(c, doc);
    return c;
}

json RunConfig::to_json() const
{
    json j;
    j["method"] = method_name(fit.method);
    j["solver"] = fit.solver == SolverKind::Likelihood ? "likelihood" : "pseudo";
    j["kernel"] = {{"type", kernel_name(fit.kernel.kind)}, {"h", fit.kernel.bandwidth}};
    j["d"] = fit.d;
    j["lambda"] = fit.lambda;
    if (fit_time_count) {
        j["fit_times"] = {{"count", *fit_time_count}};
    } else {
        j["fit_times"] = fit.fit_times;
    }
    j["correlation"] = fit.as_correlation;
    j["detrend"] = {{"enabled", detrend}, {"h", detrend_h ? json(*detrend_h) : json(nullptr)}};
    j["standardize"] = standardize;
    j["admm"] = {{"rho", fit.admm.rho ? json(*fit.admm.rho) : json(nullptr)},
                 {"alpha", fit.admm.alpha},
                 {"eps_abs", fit.admm.eps_abs},
                 {"eps_rel", fit.admm.eps_rel},
                 {"max_iter", fit.admm.max_iter}};
    j["refit"] = {{"tol", fit.refit.tol}, {"max_sweeps", fit.refit.max_sweeps}};
    j["tuning"] = {{"h", tuning.h},
                   {"d", tuning.d},
                   {"lambda", tuning.lambda},
                   {"folds", tuning.folds},
                   {"vote_threshold", tuning.vote_threshold},
                   {"edge_cap_multiplier", tuning.edge_cap_multiplier},
                   {"coarse_keep", tuning.coarse_keep},
                   {"coarse_stride", tuning.coarse_stride},
                   {"refit_on_vote", tuning.refit_on_vote}};
    std::vector<std::string> methods;
    for (Method m : bench.methods) methods.emplace_back(method_name(m));
    j["bench"] = {{"generator", bench.generator == GeneratorKind::TimeVarying ? "time-varying" : "time-invariant"},
                  {"p", bench.p},
                  {"n", bench.n},
                  {"seeds", bench.seeds},
                  {"methods", methods},
                  {"fit_times", bench.fit_time_count},
                  {"max_retries", bench.max_retries}};
    j["threads"] = fit.threads;
    return j;
}

}  // namespace loggle::cli
