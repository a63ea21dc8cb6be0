#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wignerlab/ensembles.hpp"
#include "wignerlab/spectral.hpp"

namespace wignerlab {

// Provenance key of one sampled spectrum: hash of (ensemble, n, stream).
std::string spectrumCacheKey(const EnsembleSpec& ensemble, std::size_t n, SeedStream stream);

/// Directory of spectrum CSV files named <key>.spectrum.csv.
///
/// An entry is valid only when its checksum matches and the source hash in
/// its header equals the key in its file name. Writes are atomic renames, so
/// concurrent writers of one key leave one complete file.
class SpectrumCache {
public:
    explicit SpectrumCache(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path pathFor(const std::string& key) const;

    // Empty when absent or rejected (corrupt or provenance mismatch).
    std::optional<Spectrum> load(const std::string& key) const;
    void store(const std::string& key, const Spectrum& spectrum) const;

    struct Entry {
        std::string key;
        std::filesystem::path file;
        std::string status;  // "verified", "corrupt" or "unverified"
        std::string detail;
    };

    std::vector<Entry> list(bool verify) const;
    // Deletes corrupt entries; returns how many.
    std::size_t prune() const;

private:
    std::filesystem::path root_;
};

// Environment variable naming the cache root.
inline constexpr const char* kCacheEnvVar = "WIGNERLAB_CACHE_DIR";
std::filesystem::path defaultCacheRoot();

}  // namespace wignerlab
