#include "wignerlab/cache.hpp"

#include <algorithm>
#include <cstdlib>

#include "wignerlab/error.hpp"
#include "wignerlab/io.hpp"

namespace wignerlab {

namespace {

constexpr std::string_view kSuffix = ".spectrum.csv";

std::optional<std::string> keyOf(const std::filesystem::path& file) {
    const auto name = file.filename().string();
    if (name.size() <= kSuffix.size() || !name.ends_with(kSuffix)) return std::nullopt;
    return name.substr(0, name.size() - kSuffix.size());
}

}  // namespace

std::string spectrumCacheKey(const EnsembleSpec& ensemble, std::size_t n, SeedStream stream) {
    const nlohmann::json j = {{"ensemble", ensemble},
                              {"n", n},
                              {"masterSeed", stream.masterSeed},
                              {"streamIndex", stream.streamIndex}};
    return hex64(fnv1a64(j.dump()));
}

SpectrumCache::SpectrumCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path SpectrumCache::pathFor(const std::string& key) const {
    return root_ / (key + std::string(kSuffix));
}

std::optional<Spectrum> SpectrumCache::load(const std::string& key) const {
    const auto file = pathFor(key);
    std::error_code ec;
    if (!std::filesystem::exists(file, ec)) return std::nullopt;
    try {
        auto parsed = parseSpectrumCsv(readFile(file));
        if (parsed.sourceHash != key) return std::nullopt;
        return std::move(parsed.spectrum);
    } catch (const Error&) {
        return std::nullopt;
    }
}

void SpectrumCache::store(const std::string& key, const Spectrum& spectrum) const {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) fail(ErrorCode::Io, "cannot create cache directory " + root_.string());
    writeFileAtomic(pathFor(key), spectrumCsv(spectrum, key));
}

std::vector<SpectrumCache::Entry> SpectrumCache::list(bool verify) const {
    std::vector<Entry> out;
    std::error_code ec;
    if (!std::filesystem::is_directory(root_, ec)) return out;
    for (const auto& item : std::filesystem::directory_iterator(root_, ec)) {
        if (!item.is_regular_file()) continue;
        const auto key = keyOf(item.path());
        if (!key) continue;
        Entry e{*key, item.path(), "unverified", {}};
        if (verify) {
            try {
                const auto parsed = parseSpectrumCsv(readFile(item.path()));
                if (parsed.sourceHash == *key) {
                    e.status = "verified";
                } else {
                    e.status = "corrupt";
                    e.detail = "provenance hash mismatch";
                }
            } catch (const Error& err) {
                e.status = "corrupt";
                e.detail = err.what();
            }
        }
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
    return out;
}

std::size_t SpectrumCache::prune() const {
    std::size_t removed = 0;
    for (const auto& e : list(true)) {
        if (e.status != "corrupt") continue;
        std::error_code ec;
        if (std::filesystem::remove(e.file, ec)) ++removed;
    }
    return removed;
}

std::filesystem::path defaultCacheRoot() {
    if (const char* env = std::getenv(kCacheEnvVar); env && *env) return env;
    return ".wignerlab-cache";
}

}  // namespace wignerlab
