#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace wignerlab {

// SplitMix64 finalizer; used only to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Identifies an independent random stream as (masterSeed, streamIndex).
///
/// The child generator seed is a pure function of the pair, so any worker can
/// rebuild the stream for trial i without coordination, and results do not
/// depend on how trials are scheduled.
struct SeedStream {
    std::uint64_t masterSeed = 0;
    std::uint64_t streamIndex = 0;

    std::uint64_t derivedSeed() const {
        return mix64(mix64(masterSeed) ^ mix64(streamIndex + 0x632be59bd9b4e019ULL));
    }

    // A nested stream, e.g. (trial, attempt) or (grid point, trial).
    SeedStream substream(std::uint64_t index) const { return {derivedSeed(), index}; }

    friend bool operator==(const SeedStream&, const SeedStream&) = default;
};

/// Uniform and gaussian variates with bit-level reproducibility.
///
/// std::mt19937_64 output is fully specified by the standard, but the
/// standard distributions are not, so the conversions are done here.
class Rng {
public:
    explicit Rng(SeedStream stream) : engine_(stream.derivedSeed()) {}

    std::uint64_t bits() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1); safe for quantile functions.
    double uniformOpen() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    // Standard normal via the Marsaglia polar method; the spare variate is kept.
    double gaussian();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

}  // namespace wignerlab
