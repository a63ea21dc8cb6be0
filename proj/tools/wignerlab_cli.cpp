// wignerlab command-line front end. Talks to the library through the C API only.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "wignerlab/wignerlab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEnvironment = 1;
constexpr int kExitUsage = 2;
constexpr int kExitChecksFailed = 3;

struct CliFailure {
    int exitCode;
    std::string code;
    std::string message;
};

int exitCodeFor(wl_status status) {
    switch (status) {
        case WL_OK: return kExitOk;
        case WL_NOT_FOUND:
        case WL_IO:
        case WL_CORRUPT:
        case WL_NUMERICAL_FAILURE:
        case WL_INTERNAL: return kExitEnvironment;
        default: return kExitUsage;
    }
}

void check(wl_status status) {
    if (status != WL_OK) throw CliFailure{exitCodeFor(status), wl_status_name(status), wl_last_error()};
}

struct Handles {
    struct FreeEnsemble {
        void operator()(wl_ensemble* e) const { wl_ensemble_free(e); }
    };
    struct FreeResult {
        void operator()(wl_result* r) const { wl_result_free(r); }
    };
    struct FreeString {
        void operator()(char* s) const { wl_string_free(s); }
    };
};
using EnsemblePtr = std::unique_ptr<wl_ensemble, Handles::FreeEnsemble>;
using ResultPtr = std::unique_ptr<wl_result, Handles::FreeResult>;
using StringPtr = std::unique_ptr<char, Handles::FreeString>;

struct Manifest {
    std::string configPath;
    std::string outDir = ".";
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    bool plots = false;
    // sample / experiment overrides
    std::optional<std::size_t> n;
    std::string ensemble;
    std::string kind;
    // cache
    bool verify = false;
    bool prune = false;
};

nlohmann::json loadConfig(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliFailure{kExitEnvironment, "config-not-found", "cannot open config file " + path};
    std::stringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw CliFailure{kExitUsage, "config", std::string("cannot parse ") + path + ": " + e.what()};
    }
    if (!j.is_object()) throw CliFailure{kExitUsage, "config", "config must be a JSON object"};
    // A result summary re-runs from the config it embeds.
    if (j.contains("config") && j["config"].is_object()) return j["config"];
    return j;
}

std::string optionalEnv(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

int cmdSample(const Manifest& m) {
    nlohmann::json config = m.configPath.empty() ? nlohmann::json::object() : loadConfig(m.configPath);
    if (!m.ensemble.empty()) config["ensemble"] = m.ensemble;
    if (m.n) config["n"] = *m.n;
    if (m.seed) config["masterSeed"] = *m.seed;
    if (!config.contains("ensemble")) config["ensemble"] = "gue";
    if (!config.contains("n")) throw CliFailure{kExitUsage, "config", "sample needs n"};

    const auto& n = config["n"];
    if (!n.is_number_integer()) throw CliFailure{kExitUsage, "config", "n must be an integer"};
    if (n.get<long long>() < 1) throw CliFailure{kExitUsage, "invalid-dimension", "n must be at least 1"};
    std::uint64_t masterSeed = 0;
    if (config.contains("masterSeed")) {
        if (!config["masterSeed"].is_number_unsigned())
            throw CliFailure{kExitUsage, "config", "masterSeed must be a non-negative integer"};
        masterSeed = config["masterSeed"].get<std::uint64_t>();
    }

    wl_ensemble* raw = nullptr;
    check(wl_ensemble_from_json(config["ensemble"].dump().c_str(), &raw));
    EnsemblePtr ensemble(raw);
    check(wl_sample_to_dir(ensemble.get(), n.get<std::size_t>(), masterSeed, m.outDir.c_str(), nullptr));
    std::cout << "sampled n=" << n.get<std::size_t>() << " into " << m.outDir << '\n';
    return kExitOk;
}

int cmdExperiment(const Manifest& m) {
    nlohmann::json config;
    if (!m.configPath.empty())
        config = loadConfig(m.configPath);
    else if (!m.kind.empty())
        config = {{"kind", m.kind}};
    else
        throw CliFailure{kExitUsage, "config", "experiment needs --config or --kind"};
    if (!m.kind.empty()) config["kind"] = m.kind;
    if (m.seed) config["masterSeed"] = *m.seed;
    if (m.n) config["n"] = *m.n;
    if (!m.ensemble.empty()) config["ensemble"] = m.ensemble;

    const std::string cacheDir = optionalEnv("WIGNERLAB_CACHE_DIR");
    wl_result* raw = nullptr;
    check(wl_experiment_run(config.dump().c_str(), m.workers, cacheDir.empty() ? nullptr : cacheDir.c_str(), &raw));
    ResultPtr result(raw);
    check(wl_result_write(result.get(), m.outDir.c_str(), m.plots ? 1 : 0));

    char* text = nullptr;
    check(wl_result_summary(result.get(), &text));
    StringPtr summary(text);
    const auto j = nlohmann::json::parse(summary.get());
    std::cout << j["kind"].get<std::string>() << " provenance=" << j["provenanceHash"].get<std::string>() << " -> "
              << m.outDir << '\n';
    if (!wl_result_passed(result.get())) {
        std::cerr << "error: checks-failed: " << j["kind"].get<std::string>() << " reported failing checks\n";
        return kExitChecksFailed;
    }
    return kExitOk;
}

int cmdCache(const Manifest& m) {
    if (m.prune) {
        std::size_t removed = 0;
        check(wl_cache_prune(nullptr, &removed));
        std::cout << "pruned " << removed << (removed == 1 ? " entry" : " entries") << '\n';
    }
    char* text = nullptr;
    check(wl_cache_list(nullptr, 1, &text));
    StringPtr listing(text);
    const auto entries = nlohmann::json::parse(listing.get());

    std::size_t verified = 0, corrupt = 0;
    for (const auto& e : entries) {
        const auto status = e["status"].get<std::string>();
        std::cout << e["key"].get<std::string>() << ' ' << status;
        if (!e["detail"].get<std::string>().empty()) std::cout << " (" << e["detail"].get<std::string>() << ')';
        std::cout << '\n';
        (status == "verified" ? verified : corrupt) += 1;
    }
    const std::size_t count = entries.size();
    std::cout << count << (count == 1 ? " entry" : " entries");
    if (count > 0 && corrupt == 0)
        std::cout << ", verified";
    else if (count > 0 && verified == 0)
        std::cout << ", corrupt";
    else if (count > 0)
        std::cout << ", " << verified << " verified, " << corrupt << " corrupt";
    std::cout << '\n';
    return m.verify && corrupt > 0 ? kExitEnvironment : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wigner matrix sampling and local spectral statistics"};
    app.require_subcommand(1);
    Manifest m;

    auto* sample = app.add_subcommand("sample", "Sample one matrix and write its spectrum");
    auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
    auto* cache = app.add_subcommand("cache", "List, verify or prune the spectrum cache");

    for (auto* sub : {sample, experiment}) {
        sub->add_option("--config", m.configPath, "JSON config (a result summary also works)");
        sub->add_option("--out", m.outDir, "Output directory");
        sub->add_option("--seed", m.seed, "Master seed override");
        sub->add_option("-n,--n", m.n, "Matrix dimension override");
        sub->add_option("--ensemble", m.ensemble, "Builtin ensemble name override");
    }
    experiment->add_option("--kind", m.kind, "Experiment kind (defaults apply when no config is given)");
    experiment->add_option("--workers", m.workers, "Worker threads, 0 = all cores");
    experiment->add_flag("--plots", m.plots, "Write SVG charts for tail curves and profiles");
    cache->add_flag("--verify", m.verify, "Exit 1 when any entry is corrupt");
    cache->add_flag("--prune", m.prune, "Delete corrupt entries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (sample->parsed()) return cmdSample(m);
        if (experiment->parsed()) return cmdExperiment(m);
        return cmdCache(m);
    } catch (const CliFailure& f) {
        std::cerr << "error: " << f.code << ": " << f.message << '\n';
        return f.exitCode;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return kExitEnvironment;
    }
}
