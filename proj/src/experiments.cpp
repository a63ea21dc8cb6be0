#include "wignerlab/experiments.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "wignerlab/cache.hpp"
#include "wignerlab/error.hpp"
#include "wignerlab/io.hpp"
#include "wignerlab/resolvent.hpp"

namespace wignerlab {

using nlohmann::json;

namespace {

constexpr double kQuantileLevels[] = {0.01, 0.05, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};

std::vector<double> grid(double from, double to, double step) {
    std::vector<double> g;
    const auto count = static_cast<long>(std::floor((to - from) / step + 0.5));
    for (long i = 0; i <= count; ++i) g.push_back(from + step * static_cast<double>(i));
    return g;
}

const char* matrixKindName(QuadFormMatrix kind) {
    switch (kind) {
        case QuadFormMatrix::Identity: return "identity";
        case QuadFormMatrix::Projection: return "projection";
        case QuadFormMatrix::Resolvent: return "resolvent";
    }
    return "identity";
}

QuadFormMatrix parseMatrixKind(const std::string& name) {
    if (name == "identity") return QuadFormMatrix::Identity;
    if (name == "projection") return QuadFormMatrix::Projection;
    if (name == "resolvent") return QuadFormMatrix::Resolvent;
    fail(ErrorCode::Config, "unknown quadform matrixKind '" + name + "'");
}

// Stream for objects shared by all trials of a run (subspaces, fixed matrices).
SeedStream sharedStream(std::uint64_t masterSeed, std::uint64_t tag) {
    return SeedStream{mix64(masterSeed ^ 0x5eedf00dULL), tag};
}

std::vector<TailPoint> tailCurveOf(std::span<const double> samples, std::span<const double> thresholds) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double count = static_cast<double>(sorted.size());
    std::vector<TailPoint> curve;
    for (double T : thresholds) {
        const auto firstAtLeast = std::lower_bound(sorted.begin(), sorted.end(), T);
        const double p = static_cast<double>(sorted.end() - firstAtLeast) / count;
        curve.push_back({T, p, std::sqrt(p * (1.0 - p) / count)});
    }
    return curve;
}

double meanOf(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double unbiasedVarianceOf(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = meanOf(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

SpectrumSource defaultSource(const ExperimentConfig& config) {
    return [&config](std::size_t trial) {
        return trialSpectrum(config.ensemble, config.n, SeedStream{config.masterSeed, trial}, config.cacheDir);
    };
}

std::vector<Spectrum> collectSpectra(const ExperimentConfig& config, const SpectrumSource& source) {
    const SpectrumSource& produce = source ? source : defaultSource(config);
    std::vector<std::optional<Spectrum>> slots(config.trials);
    forEachTrial(config.trials, config.workers, [&](std::size_t t) { slots[t] = produce(t); });
    std::vector<Spectrum> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

void validate(const ExperimentConfig& c) {
    if (c.n == 0 && c.kind != ExperimentKind::LocalLaw && c.kind != ExperimentKind::Identities)
        fail(ErrorCode::InvalidDimension, "n must be at least 1");
    if (c.trials == 0) fail(ErrorCode::Config, "trials must be at least 1");
    c.ensemble.validate();
    if (!(c.eta > 0.0)) fail(ErrorCode::Config, "eta must be positive");
    switch (c.kind) {
        case ExperimentKind::Tail:
            if (!(c.intervalLo <= c.intervalHi)) fail(ErrorCode::Config, "interval needs lo <= hi");
            break;
        case ExperimentKind::Swap:
            if (c.k % 2 != 0 || c.k < 2 || c.k > 12)
                fail(ErrorCode::InvalidArguments, "swap moment order k must be even and in [2, 12]");
            if (c.swap.row >= c.n || c.swap.col >= c.n) fail(ErrorCode::Config, "swap position outside the matrix");
            if (c.swap.row == c.swap.col && c.swap.imaginaryPart)
                fail(ErrorCode::Config, "diagonal entries have no imaginary part to swap");
            break;
        case ExperimentKind::QuadForm:
            if (c.matrixKind == QuadFormMatrix::Projection && (c.subspaceDim == 0 || c.subspaceDim > c.n))
                fail(ErrorCode::Config, "subspaceDim must be in [1, n]");
            break;
        case ExperimentKind::LocalLaw:
            if (c.nGrid.empty() || c.energyGrid.empty() || (c.etaGrid.empty() && c.nEtaGrid.empty()))
                fail(ErrorCode::Config, "locallaw needs nGrid, energyGrid and etaGrid or nEtaGrid");
            for (auto n : c.nGrid)
                if (n == 0) fail(ErrorCode::InvalidDimension, "nGrid entries must be at least 1");
            for (double e : c.etaGrid)
                if (!(e > 0.0)) fail(ErrorCode::Config, "etaGrid values must be positive");
            for (double e : c.nEtaGrid)
                if (!(e > 0.0)) fail(ErrorCode::Config, "nEtaGrid values must be positive");
            break;
        case ExperimentKind::Identities:
            if (c.dims.empty()) fail(ErrorCode::Config, "identities needs dims");
            for (auto n : c.dims)
                if (n < 2) fail(ErrorCode::InvalidDimension, "identity dims must be at least 2");
            if (c.seriesDim < 2) fail(ErrorCode::InvalidDimension, "seriesDim must be at least 2");
            if (!(c.etaFloor > 0.0 && c.etaFloor < 0.5)) fail(ErrorCode::Config, "etaFloor must be in (0, 0.5)");
            break;
        default:
            break;
    }
}

template <class T>
void readField(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("bad config field '") + key + "': " + e.what());
    }
}

}  // namespace

std::string_view kindName(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Variance: return "variance";
        case ExperimentKind::Tail: return "tail";
        case ExperimentKind::Edge: return "edge";
        case ExperimentKind::Rigidity: return "rigidity";
        case ExperimentKind::Swap: return "swap";
        case ExperimentKind::QuadForm: return "quadform";
        case ExperimentKind::LocalLaw: return "locallaw";
        case ExperimentKind::Identities: return "identities";
    }
    return "variance";
}

ExperimentKind parseKind(const std::string& name) {
    for (auto k : {ExperimentKind::Variance, ExperimentKind::Tail, ExperimentKind::Edge, ExperimentKind::Rigidity,
                   ExperimentKind::Swap, ExperimentKind::QuadForm, ExperimentKind::LocalLaw,
                   ExperimentKind::Identities})
        if (kindName(k) == name) return k;
    fail(ErrorCode::Config, "unknown experiment kind '" + name + "'");
}

ExperimentConfig defaultConfig(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
        case ExperimentKind::Variance:
            c.n = 400;
            c.trials = 2000;
            c.tGrid = grid(0.0, 5.0, 0.5);
            break;
        case ExperimentKind::Tail:
            c.n = 400;
            c.trials = 2000;
            c.tGrid = grid(0.0, 12.0, 1.0);
            break;
        case ExperimentKind::Edge:
            c.n = 500;
            c.trials = 500;
            c.tGrid = grid(-5.0, 6.0, 0.5);
            break;
        case ExperimentKind::Rigidity:
            c.n = 1000;
            c.trials = 200;
            c.tGrid = grid(0.0, 60.0, 5.0);
            break;
        case ExperimentKind::Swap:
            c.n = 200;
            c.trials = 2000;
            c.k = 4;
            c.energy = 0.0;
            c.eta = 0.1;
            break;
        case ExperimentKind::QuadForm:
            c.n = 200;
            c.trials = 1000;
            c.tGrid = grid(0.0, 8.0, 0.5);
            break;
        case ExperimentKind::LocalLaw:
            c.n = 0;
            c.trials = 200;
            c.nGrid = {100, 200, 400};
            c.energyGrid = {0.0};
            c.nEtaGrid = {20.0};
            break;
        case ExperimentKind::Identities:
            c.n = 0;
            c.trials = 100;
            c.dims = {10, 30, 50};
            break;
    }
    return c;
}

json configToJson(const ExperimentConfig& c) {
    json j = {{"kind", kindName(c.kind)}, {"ensemble", c.ensemble}, {"trials", c.trials}, {"masterSeed", c.masterSeed}};
    switch (c.kind) {
        case ExperimentKind::Variance:
            j["n"] = c.n;
            j["x"] = c.x;
            j["tGrid"] = c.tGrid;
            break;
        case ExperimentKind::Tail:
            j["n"] = c.n;
            j["interval"] = {c.intervalLo, c.intervalHi};
            j["tGrid"] = c.tGrid;
            break;
        case ExperimentKind::Edge:
        case ExperimentKind::Rigidity:
            j["n"] = c.n;
            j["tGrid"] = c.tGrid;
            break;
        case ExperimentKind::Swap:
            j["n"] = c.n;
            j["k"] = c.k;
            j["energy"] = c.energy;
            j["eta"] = c.eta;
            j["swap"] = {{"from", c.swap.from},
                         {"to", c.swap.to},
                         {"row", c.swap.row},
                         {"col", c.swap.col},
                         {"part", c.swap.imaginaryPart ? "imag" : "real"}};
            break;
        case ExperimentKind::QuadForm:
            j["n"] = c.n;
            j["matrixKind"] = matrixKindName(c.matrixKind);
            j["subspaceDim"] = c.subspaceDim;
            j["energy"] = c.energy;
            j["eta"] = c.eta;
            j["tGrid"] = c.tGrid;
            break;
        case ExperimentKind::LocalLaw:
            j["nGrid"] = c.nGrid;
            j["energyGrid"] = c.energyGrid;
            j["etaGrid"] = c.etaGrid;
            j["nEtaGrid"] = c.nEtaGrid;
            break;
        case ExperimentKind::Identities:
            j["dims"] = c.dims;
            j["etaFloor"] = c.etaFloor;
            j["seriesInstances"] = c.seriesInstances;
            j["seriesDim"] = c.seriesDim;
            j["seriesOrder"] = c.seriesOrder;
            j["seriesT"] = c.seriesT;
            j["seriesEnergy"] = c.seriesEnergy;
            j["seriesEta"] = c.seriesEta;
            break;
    }
    return j;
}

ExperimentConfig configFromJson(const json& j) {
    if (!j.is_object()) fail(ErrorCode::Config, "experiment config must be a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string()) fail(ErrorCode::Config, "experiment config needs a kind");
    ExperimentConfig c = defaultConfig(parseKind(j["kind"].get<std::string>()));
    if (j.contains("ensemble")) c.ensemble = ensembleFromJson(j["ensemble"]);
    if (j.contains("n")) {
        long long n = 0;
        readField(j, "n", n);
        if (n < 1) fail(ErrorCode::InvalidDimension, "n must be at least 1");
        c.n = static_cast<std::size_t>(n);
        if (c.kind == ExperimentKind::Identities && !j.contains("dims")) c.dims = {c.n};
    }
    readField(j, "trials", c.trials);
    readField(j, "masterSeed", c.masterSeed);
    readField(j, "x", c.x);
    if (j.contains("interval")) {
        std::vector<double> interval;
        readField(j, "interval", interval);
        if (interval.size() != 2) fail(ErrorCode::Config, "interval must be [lo, hi]");
        c.intervalLo = interval[0];
        c.intervalHi = interval[1];
    }
    readField(j, "tGrid", c.tGrid);
    std::sort(c.tGrid.begin(), c.tGrid.end());
    readField(j, "energy", c.energy);
    readField(j, "eta", c.eta);
    readField(j, "k", c.k);
    if (j.contains("swap")) {
        const auto& s = j["swap"];
        if (!s.is_object()) fail(ErrorCode::Config, "swap must be an object");
        if (s.contains("from")) c.swap.from = s["from"].get<AtomDistribution>();
        if (s.contains("to")) c.swap.to = s["to"].get<AtomDistribution>();
        readField(s, "row", c.swap.row);
        readField(s, "col", c.swap.col);
        std::string part = c.swap.imaginaryPart ? "imag" : "real";
        readField(s, "part", part);
        if (part != "real" && part != "imag") fail(ErrorCode::Config, "swap part must be real or imag");
        c.swap.imaginaryPart = part == "imag";
    }
    if (j.contains("matrixKind")) {
        std::string kind;
        readField(j, "matrixKind", kind);
        c.matrixKind = parseMatrixKind(kind);
    }
    readField(j, "subspaceDim", c.subspaceDim);
    readField(j, "nGrid", c.nGrid);
    readField(j, "energyGrid", c.energyGrid);
    readField(j, "etaGrid", c.etaGrid);
    readField(j, "nEtaGrid", c.nEtaGrid);
    readField(j, "dims", c.dims);
    readField(j, "etaFloor", c.etaFloor);
    readField(j, "seriesInstances", c.seriesInstances);
    readField(j, "seriesDim", c.seriesDim);
    readField(j, "seriesOrder", c.seriesOrder);
    readField(j, "seriesT", c.seriesT);
    readField(j, "seriesEnergy", c.seriesEnergy);
    readField(j, "seriesEta", c.seriesEta);
    validate(c);
    return c;
}

std::string provenanceHash(const ExperimentConfig& config) { return hex64(fnv1a64(configToJson(config).dump())); }

double sampleQuantile(std::span<const double> samples, double level) {
    if (samples.empty()) fail(ErrorCode::InvalidArguments, "quantile of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = (static_cast<double>(sorted.size()) - 1.0) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double jackknifeVarianceStdError(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 3) return 0.0;
    const double m = meanOf(samples);
    double s1 = 0.0, s2 = 0.0;
    for (double x : samples) {
        s1 += x - m;
        s2 += (x - m) * (x - m);
    }
    const double dn = static_cast<double>(n);
    std::vector<double> leaveOut(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = samples[i] - m;
        const double sum = s1 - d, sq = s2 - d * d;
        leaveOut[i] = (sq - sum * sum / (dn - 1.0)) / (dn - 2.0);
    }
    const double lm = meanOf(leaveOut);
    double acc = 0.0;
    for (double v : leaveOut) acc += (v - lm) * (v - lm);
    return std::sqrt((dn - 1.0) / dn * acc);
}

double EmpiricalSummary::quantile(double level) const {
    for (const auto& [l, v] : quantiles)
        if (std::abs(l - level) < 1e-12) return v;
    fail(ErrorCode::InvalidArguments, "quantile level not recorded");
}

EmpiricalSummary summarize(std::span<const double> samples, std::span<const double> tGrid,
                           const std::string& provenance) {
    if (samples.empty()) fail(ErrorCode::InvalidArguments, "cannot summarize an empty sample");
    EmpiricalSummary s;
    s.sampleCount = samples.size();
    s.mean = meanOf(samples);
    s.unbiasedVariance = unbiasedVarianceOf(samples);
    s.varianceStdError = jackknifeVarianceStdError(samples);
    for (double level : kQuantileLevels) s.quantiles.emplace_back(level, sampleQuantile(samples, level));
    s.tailCurve = tailCurveOf(samples, tGrid);
    s.provenanceHash = provenance;
    return s;
}

json toJson(const EmpiricalSummary& s) {
    json quantiles = json::object();
    for (const auto& [level, value] : s.quantiles) quantiles[formatDouble(level)] = value;
    json tail = json::array();
    for (const auto& p : s.tailCurve) tail.push_back({{"T", p.threshold}, {"frequency", p.frequency}, {"stderr", p.stderror}});
    return {{"sampleCount", s.sampleCount},
            {"mean", s.mean},
            {"unbiasedVariance", s.unbiasedVariance},
            {"varianceStdError", s.varianceStdError},
            {"quantiles", quantiles},
            {"tailCurve", tail},
            {"provenanceHash", s.provenanceHash}};
}

std::string tailCsv(const std::vector<TailPoint>& curve) {
    std::ostringstream os;
    os << "T,frequency,stderr\n";
    for (const auto& p : curve)
        os << formatDouble(p.threshold) << ',' << formatDouble(p.frequency) << ',' << formatDouble(p.stderror) << '\n';
    return os.str();
}

Spectrum trialSpectrum(const EnsembleSpec& ensemble, std::size_t n, SeedStream stream, const std::string& cacheDir) {
    std::optional<SpectrumCache> cache;
    std::string key;
    if (!cacheDir.empty()) {
        cache.emplace(cacheDir);
        key = spectrumCacheKey(ensemble, n, stream);
        if (auto hit = cache->load(key)) return std::move(*hit);
    }
    constexpr int kAttempts = 4;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const SeedStream s = attempt == 0 ? stream : stream.substream(static_cast<std::uint64_t>(attempt));
        try {
            Spectrum spectrum = eigenvalues(normalize(sampleWigner(ensemble, n, s)), {false, ResidualKind::TraceMoments});
            if (cache) cache->store(key, spectrum);
            return spectrum;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NumericalFailure) throw;
            std::cerr << "warning: rejected spectrum (stream " << stream.streamIndex << ", attempt " << attempt
                      << "): " << e.what() << ", resampling\n";
        }
    }
    fail(ErrorCode::NumericalFailure, "eigensolve rejected on every resampling attempt");
}

void forEachTrial(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
    unsigned threads = workers ? workers : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex errorMutex;
    std::exception_ptr firstError;
    std::size_t firstErrorIndex = count;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(errorMutex);
                if (i < firstErrorIndex) {
                    firstErrorIndex = i;
                    firstError = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (firstError) std::rethrow_exception(firstError);
}

VarianceResult runVarianceExperiment(const ExperimentConfig& config, const SpectrumSource& source) {
    validate(config);
    const auto hash = provenanceHash(config);
    const auto spectra = collectSpectra(config, source);
    const Interval below = Interval::below(config.x);
    std::vector<double> counts, deviations;
    VarianceResult r;
    r.centre = static_cast<double>(config.n) * semicircleCdf(config.x);
    for (const auto& s : spectra) {
        counts.push_back(static_cast<double>(countInInterval(s, below)));
        deviations.push_back(std::abs(counts.back() - r.centre));
    }
    r.counts = summarize(counts, {}, hash);
    r.rawCounts = std::move(counts);
    r.counts.tailCurve = tailCurveOf(deviations, config.tGrid);
    r.meanDeviation = r.counts.mean - r.centre;
    if (config.ensemble == gueEnsemble() && config.x > -2.0 && config.x < 2.0) {
        const double n = static_cast<double>(config.n);
        r.referenceValue = std::log(n * std::pow(2.0 + config.x, 1.5)) / (2.0 * std::numbers::pi * std::numbers::pi);
        r.ratio = r.counts.unbiasedVariance / *r.referenceValue;
    }
    return r;
}

TailResult runTailExperiment(const ExperimentConfig& config, const SpectrumSource& source) {
    validate(config);
    const auto spectra = collectSpectra(config, source);
    const Interval I = Interval::halfOpen(config.intervalLo, config.intervalHi);
    std::vector<double> deviations;
    for (const auto& s : spectra) deviations.push_back(std::abs(semicircleDeviation(s, I)));
    TailResult r;
    r.deviation = summarize(deviations, config.tGrid, provenanceHash(config));

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : r.deviation.tailCurve) {
        if (p.frequency <= 0.0) continue;
        const double y = std::log(p.frequency);
        sx += p.threshold;
        sy += y;
        sxx += p.threshold * p.threshold;
        sxy += p.threshold * y;
        ++r.fitPoints;
    }
    if (r.fitPoints >= 2) {
        const double m = static_cast<double>(r.fitPoints);
        const double denom = m * sxx - sx * sx;
        r.slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
    }
    return r;
}

EdgeResult runEdgeExperiment(const ExperimentConfig& config, const SpectrumSource& source) {
    validate(config);
    const auto hash = provenanceHash(config);
    const auto spectra = collectSpectra(config, source);
    std::vector<double> upper, lower;
    for (const auto& s : spectra) {
        upper.push_back(edgeStatistic(s));
        lower.push_back(edgeStatisticLower(s));
    }
    EdgeResult r;
    r.upper = summarize(upper, config.tGrid, hash);
    r.lower = summarize(lower, config.tGrid, hash);
    const double count = static_cast<double>(config.trials);
    for (std::size_t i = 0; i < r.upper.tailCurve.size(); ++i) {
        const double p = r.upper.tailCurve[i].frequency, q = r.lower.tailCurve[i].frequency;
        const double se = std::sqrt((p * (1.0 - p) + q * (1.0 - q)) / count);
        const double z = se > 0.0 ? std::abs(p - q) / se : (p == q ? 0.0 : std::numeric_limits<double>::infinity());
        r.maxSymmetryZ = std::max(r.maxSymmetryZ, z);
    }
    r.symmetric = r.maxSymmetryZ <= 3.0;
    return r;
}

RigidityResult runRigidityExperiment(const ExperimentConfig& config, const SpectrumSource& source) {
    validate(config);
    const auto hash = provenanceHash(config);
    const auto spectra = collectSpectra(config, source);
    const auto gamma = classicalLocations(config.n);
    const std::size_t n = config.n;
    RigidityResult r;
    r.edgeDepth = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.1)));
    r.gamma = gamma.gamma;
    r.meanProfile.assign(n, 0.0);
    r.maxProfile.assign(n, 0.0);
    std::vector<double> bulkMax, edgeMax;
    for (const auto& s : spectra) {
        const auto profile = rigidityProfile(s, gamma);
        double bulk = 0.0, edge = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double v = profile[i - 1];
            if (std::min(i, n - i + 1) <= r.edgeDepth)
                edge = std::max(edge, v);
            else
                bulk = std::max(bulk, v);
            r.meanProfile[i - 1] += v / static_cast<double>(spectra.size());
            r.maxProfile[i - 1] = std::max(r.maxProfile[i - 1], v);
        }
        bulkMax.push_back(bulk);
        edgeMax.push_back(edge);
    }
    r.bulkMax = summarize(bulkMax, config.tGrid, hash);
    r.edgeMax = summarize(edgeMax, config.tGrid, hash);
    return r;
}

SwapReport runSwapExperiment(const ExperimentConfig& config) {
    validate(config);
    const std::size_t n = config.n;
    const ComplexEnergy z(config.energy, config.eta);
    const auto row = static_cast<Eigen::Index>(config.swap.row), col = static_cast<Eigen::Index>(config.swap.col);
    std::vector<double> before(config.trials), after(config.trials);

    forEachTrial(config.trials, config.workers, [&](std::size_t t) {
        Rng rng(SeedStream{config.masterSeed, t});
        const HermitianMatrix base = sampleWigner(config.ensemble, n, rng);
        // One uniform drives both atoms (comonotone coupling).
        const double u = rng.uniformOpen();
        auto complete = [&](const AtomDistribution& atom) {
            ComplexMatrix m = base.entries();
            const double value = atom.quantile(u);
            Complex entry = m(row, col);
            if (config.swap.imaginaryPart)
                entry.imag(value);
            else
                entry.real(value);
            m(row, col) = entry;
            m(col, row) = std::conj(entry);
            const Spectrum s =
                eigenvalues(normalize(HermitianMatrix(std::move(m), MatrixScale::Raw)), {false, ResidualKind::TraceMoments});
            return std::pow(statA(s, z).modulus, config.k);
        };
        before[t] = complete(config.swap.from);
        after[t] = complete(config.swap.to);
    });

    std::vector<double> diff(config.trials);
    for (std::size_t t = 0; t < config.trials; ++t) diff[t] = before[t] - after[t];
    const double count = static_cast<double>(config.trials);
    SwapReport r;
    r.k = config.k;
    r.matchOrder = matchOrder(config.swap.from, config.swap.to, 6);
    r.meanBefore = meanOf(before);
    r.meanAfter = meanOf(after);
    r.stderrBefore = std::sqrt(unbiasedVarianceOf(before) / count);
    r.stderrAfter = std::sqrt(unbiasedVarianceOf(after) / count);
    r.relativeGap = r.meanBefore != 0.0 ? (r.meanAfter - r.meanBefore) / r.meanBefore : 0.0;
    r.pairedMean = meanOf(diff);
    r.pairedStderr = std::sqrt(unbiasedVarianceOf(diff) / count);
    r.unpairedStderr = std::hypot(r.stderrBefore, r.stderrAfter);
    if (r.pairedStderr > 0.0) {
        r.zScore = r.pairedMean / r.pairedStderr;
        r.significant = std::abs(r.zScore) > 3.0;
        r.verdict = r.significant ? "significant" : "indistinguishable";
    } else {
        r.zScore = 0.0;
        r.significant = r.pairedMean != 0.0;
        r.verdict = r.significant ? "significant" : "identical";
    }
    return r;
}

QuadFormResult runQuadFormExperiment(const ExperimentConfig& config) {
    validate(config);
    const std::size_t n = config.n;
    const auto N = static_cast<Eigen::Index>(n);
    const double sigmaSq = config.ensemble.offDiagReal.variance() + config.ensemble.offDiagImag.variance();

    ComplexMatrix A;
    ComplexMatrix basis;
    switch (config.matrixKind) {
        case QuadFormMatrix::Identity:
            A = ComplexMatrix::Identity(N, N);
            break;
        case QuadFormMatrix::Projection: {
            Rng rng(sharedStream(config.masterSeed, 1));
            const auto d = static_cast<Eigen::Index>(config.subspaceDim);
            ComplexMatrix g(N, d);
            for (Eigen::Index c = 0; c < d; ++c)
                for (Eigen::Index r = 0; r < N; ++r) g(r, c) = Complex(rng.gaussian(), rng.gaussian());
            Eigen::HouseholderQR<ComplexMatrix> qr(g);
            basis = qr.householderQ() * ComplexMatrix::Identity(N, d);
            A = basis * basis.adjoint();
            break;
        }
        case QuadFormMatrix::Resolvent: {
            const HermitianMatrix W = normalize(sampleWigner(config.ensemble, n, sharedStream(config.masterSeed, 2)));
            A = resolvent(W, ComplexEnergy(config.energy, config.eta)).entries();
            break;
        }
    }

    std::vector<double> stat(config.trials), projection(config.trials, 0.0);
    forEachTrial(config.trials, config.workers, [&](std::size_t t) {
        Rng rng(SeedStream{config.masterSeed, t});
        ComplexVector X(N);
        for (Eigen::Index i = 0; i < N; ++i) {
            const double re = config.ensemble.offDiagReal.sample(rng);
            const double im = config.ensemble.offDiagImag.sample(rng);
            X(i) = Complex(re, im);
        }
        stat[t] = quadraticFormStat(X, A, sigmaSq).modulus;
        if (config.matrixKind == QuadFormMatrix::Projection) projection[t] = subspaceProjectionNorm(X, basis);
    });

    QuadFormResult r;
    r.statistic = summarize(stat, config.tGrid, provenanceHash(config));
    if (config.matrixKind == QuadFormMatrix::Projection) {
        const double d = static_cast<double>(config.subspaceDim) * sigmaSq;
        r.projectionMeanOverDim = meanOf(projection) / d;
        std::size_t outside = 0;
        for (double v : projection)
            if (v < 0.9 * d || v > 1.1 * d) ++outside;
        r.projectionBandMiss = static_cast<double>(outside) / static_cast<double>(config.trials);
    }
    return r;
}

LocalLawResult runLocalLawSweep(const ExperimentConfig& config) {
    validate(config);
    const auto hash = provenanceHash(config);
    LocalLawResult r;
    for (std::size_t g = 0; g < config.nGrid.size(); ++g) {
        const std::size_t n = config.nGrid[g];
        const double dn = static_cast<double>(n);
        struct Point {
            double E, eta, nEta;
        };
        std::vector<Point> points;
        for (double E : config.energyGrid) {
            for (double eta : config.etaGrid) points.push_back({E, eta, dn * eta});
            for (double c : config.nEtaGrid) points.push_back({E, c / dn, c});
        }
        std::vector<std::vector<double>> modA(points.size(), std::vector<double>(config.trials));
        std::vector<std::vector<double>> gap(points.size(), std::vector<double>(config.trials));
        forEachTrial(config.trials, config.workers, [&](std::size_t t) {
            const Spectrum s = trialSpectrum(config.ensemble, n, SeedStream{config.masterSeed, t}.substream(g), config.cacheDir);
            for (std::size_t p = 0; p < points.size(); ++p) {
                const ComplexEnergy z(points[p].E, points[p].eta);
                const double a = statA(s, z).modulus;
                modA[p][t] = a;
                gap[p][t] = a / (dn * points[p].eta);
            }
        });
        for (std::size_t p = 0; p < points.size(); ++p) {
            LocalLawPoint lp;
            lp.n = n;
            lp.energy = points[p].E;
            lp.eta = points[p].eta;
            lp.nEta = points[p].nEta;
            lp.modulusA = summarize(modA[p], {}, hash);
            lp.medianGap = sampleQuantile(gap[p], 0.5);
            r.points.push_back(std::move(lp));
        }
    }
    for (double E : config.energyGrid) {
        for (double c : config.nEtaGrid) {
            ScaleInvariance si{E, c, std::numeric_limits<double>::infinity(), 0.0, 0.0};
            for (const auto& p : r.points) {
                if (p.energy != E || std::abs(p.nEta - c) > 1e-9 * c) continue;
                const double median = p.modulusA.quantile(0.5);
                si.minMedian = std::min(si.minMedian, median);
                si.maxMedian = std::max(si.maxMedian, median);
            }
            si.ratio = si.minMedian > 0.0 ? si.maxMedian / si.minMedian : std::numeric_limits<double>::infinity();
            r.invariance.push_back(si);
        }
    }
    return r;
}

IdentityReport runIdentitySuite(const ExperimentConfig& config) {
    validate(config);
    struct SampleOutcome {
        double schurDiag = 0, schurOff = 0, resolventResidual = 0, traceGap = 0, conjugate = 0, interlacing = 0;
    };
    std::vector<SampleOutcome> outcomes(config.trials);
    forEachTrial(config.trials, config.workers, [&](std::size_t s) {
        Rng rng(SeedStream{config.masterSeed, s});
        const std::size_t n = config.dims[s % config.dims.size()];
        const HermitianMatrix W = normalize(sampleWigner(config.ensemble, n, rng));
        const double E = -1.5 + 3.0 * rng.uniform();
        const double eta = config.etaFloor + (0.5 - config.etaFloor) * rng.uniform();
        const ComplexEnergy z(E, eta);
        const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
        const auto j = (i + 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1))) % n;
        const auto removed = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));

        SampleOutcome o;
        o.schurDiag = schurDiagonal(W, z, i);
        o.schurOff = schurOffDiagonal(W, z, i, j);
        const Resolvent R = resolvent(W, z);
        o.resolventResidual = R.definingResidual();
        const Spectrum full = eigenvalues(W);
        o.traceGap = std::abs(R.trace() / static_cast<double>(n) - stieltjesEmpirical(full, z));
        o.conjugate = conjugateSymmetryResidual(W, z);
        const std::size_t drop[] = {removed};
        o.interlacing = checkInterlacing(full, eigenvalues(minor(W, drop))).maxViolation;
        outcomes[s] = o;
    });

    std::vector<double> ratios(config.seriesInstances);
    forEachTrial(config.seriesInstances, config.workers, [&](std::size_t q) {
        Rng rng(SeedStream{config.masterSeed, q}.substream(1));
        const std::size_t n = config.seriesDim;
        const HermitianMatrix M0 = normalize(sampleWigner(config.ensemble, n, rng));
        const auto a = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
        const auto b = (a + 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1))) % n;
        const auto V = ElementaryMatrix::symmetricPair(a, b);
        const ComplexEnergy z(config.seriesEnergy, config.seriesEta);
        const double coarse = perturbSeries(M0, V, config.seriesT, z, config.seriesOrder).error;
        const double fine = perturbSeries(M0, V, config.seriesT / 2.0, z, config.seriesOrder).error;
        ratios[q] = fine > 0.0 ? coarse / fine : std::numeric_limits<double>::infinity();
    });

    IdentityReport report;
    auto addMax = [&](const std::string& name, double threshold, auto field) {
        IdentityCheck c{name, outcomes.size(), 0.0, threshold, false, 0};
        for (const auto& o : outcomes) {
            const double v = o.*field;
            c.worst = std::max(c.worst, v);
            if (!(v <= threshold)) ++c.failures;
        }
        report.checks.push_back(c);
    };
    addMax("schur-diagonal", 1e-9, &SampleOutcome::schurDiag);
    addMax("schur-offdiagonal", 1e-9, &SampleOutcome::schurOff);
    addMax("resolvent-residual", 1e-8, &SampleOutcome::resolventResidual);
    addMax("resolvent-trace", 1e-8, &SampleOutcome::traceGap);
    addMax("resolvent-conjugate-symmetry", 1e-8, &SampleOutcome::conjugate);
    addMax("interlacing", 1e-9, &SampleOutcome::interlacing);

    const double requiredRatio = config.seriesOrder == 3 ? 11.0 : std::pow(2.0, config.seriesOrder + 0.5);
    IdentityCheck series{"perturbation-order", ratios.size(), std::numeric_limits<double>::infinity(), requiredRatio, true, 0};
    for (double v : ratios) {
        series.worst = std::min(series.worst, v);
        if (!(v >= requiredRatio)) ++series.failures;
    }
    report.checks.push_back(series);
    for (const auto& c : report.checks) report.passed = report.passed && c.failures == 0;
    return report;
}

namespace {

json provenanceJson(const ExperimentConfig& config, const std::string& hash) {
    return {{"kind", kindName(config.kind)}, {"provenanceHash", hash}, {"config", configToJson(config)}};
}

std::string countDistributionCsv(std::span<const double> counts) {
    std::vector<double> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    const double total = static_cast<double>(sorted.size());
    std::ostringstream os;
    os << "count,frequency,stderr\n";
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double p = static_cast<double>(j - i) / total;
        os << formatDouble(sorted[i]) << ',' << formatDouble(p) << ',' << formatDouble(std::sqrt(p * (1 - p) / total))
           << '\n';
        i = j;
    }
    return os.str();
}

json optionalJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ExperimentResult runExperiment(const ExperimentConfig& config) {
    validate(config);
    ExperimentResult out;
    out.config = config;
    out.provenanceHash = provenanceHash(config);
    out.summary = provenanceJson(config, out.provenanceHash);
    json& results = out.summary["results"];

    switch (config.kind) {
        case ExperimentKind::Variance: {
            const auto r = runVarianceExperiment(config);
            results = {{"varianceEstimate", r.counts.unbiasedVariance},
                       {"varianceStdError", r.counts.varianceStdError},
                       {"referenceValue", optionalJson(r.referenceValue)},
                       {"ratio", optionalJson(r.ratio)},
                       {"meanCount", r.counts.mean},
                       {"centre", r.centre},
                       {"meanDeviation", r.meanDeviation},
                       {"summary", toJson(r.counts)}};
            out.tables.push_back({"deviation_tail", tailCsv(r.counts.tailCurve), true});
            out.tables.push_back({"count_distribution", countDistributionCsv(r.rawCounts), false});
            break;
        }
        case ExperimentKind::Tail: {
            const auto r = runTailExperiment(config);
            results = {{"slope", r.slope}, {"fitPoints", r.fitPoints}, {"summary", toJson(r.deviation)}};
            out.tables.push_back({"tail", tailCsv(r.deviation.tailCurve), true});
            break;
        }
        case ExperimentKind::Edge: {
            const auto r = runEdgeExperiment(config);
            results = {{"maxSymmetryZ", r.maxSymmetryZ},
                       {"symmetric", r.symmetric},
                       {"upper", toJson(r.upper)},
                       {"lower", toJson(r.lower)}};
            out.tables.push_back({"upper_tail", tailCsv(r.upper.tailCurve), true});
            out.tables.push_back({"lower_tail", tailCsv(r.lower.tailCurve), true});
            break;
        }
        case ExperimentKind::Rigidity: {
            const auto r = runRigidityExperiment(config);
            results = {{"edgeDepth", r.edgeDepth},
                       {"bulkMaxQ95", r.bulkMax.quantile(0.95)},
                       {"bulkMax", toJson(r.bulkMax)},
                       {"edgeMax", toJson(r.edgeMax)}};
            std::ostringstream profile;
            profile << "index,gamma,meanRescaled,maxRescaled\n";
            for (std::size_t i = 0; i < r.gamma.size(); ++i)
                profile << (i + 1) << ',' << formatDouble(r.gamma[i]) << ',' << formatDouble(r.meanProfile[i]) << ','
                        << formatDouble(r.maxProfile[i]) << '\n';
            out.tables.push_back({"profile", profile.str(), false});
            out.tables.push_back({"bulk_max_tail", tailCsv(r.bulkMax.tailCurve), true});
            break;
        }
        case ExperimentKind::Swap: {
            const auto r = runSwapExperiment(config);
            results = {{"k", r.k},
                       {"matchOrder", r.matchOrder},
                       {"meanBefore", r.meanBefore},
                       {"stderrBefore", r.stderrBefore},
                       {"meanAfter", r.meanAfter},
                       {"stderrAfter", r.stderrAfter},
                       {"relativeGap", r.relativeGap},
                       {"pairedMean", r.pairedMean},
                       {"pairedStderr", r.pairedStderr},
                       {"unpairedStderr", r.unpairedStderr},
                       {"zScore", r.zScore},
                       {"significant", r.significant},
                       {"verdict", r.verdict}};
            std::ostringstream table;
            table << "estimate,mean,stderr\n"
                  << "before," << formatDouble(r.meanBefore) << ',' << formatDouble(r.stderrBefore) << '\n'
                  << "after," << formatDouble(r.meanAfter) << ',' << formatDouble(r.stderrAfter) << '\n'
                  << "paired_difference," << formatDouble(r.pairedMean) << ',' << formatDouble(r.pairedStderr) << '\n';
            out.tables.push_back({"swap", table.str(), false});
            break;
        }
        case ExperimentKind::QuadForm: {
            const auto r = runQuadFormExperiment(config);
            results = {{"projectionMeanOverDim", optionalJson(r.projectionMeanOverDim)},
                       {"projectionBandMiss", optionalJson(r.projectionBandMiss)},
                       {"summary", toJson(r.statistic)}};
            out.tables.push_back({"tail", tailCsv(r.statistic.tailCurve), true});
            break;
        }
        case ExperimentKind::LocalLaw: {
            const auto r = runLocalLawSweep(config);
            json points = json::array(), invariance = json::array();
            std::ostringstream table;
            table << "n,E,eta,nEta,medianA,q90A,q99A,medianGap\n";
            for (const auto& p : r.points) {
                points.push_back({{"n", p.n},
                                  {"E", p.energy},
                                  {"eta", p.eta},
                                  {"nEta", p.nEta},
                                  {"medianGap", p.medianGap},
                                  {"modulusA", toJson(p.modulusA)}});
                table << p.n << ',' << formatDouble(p.energy) << ',' << formatDouble(p.eta) << ','
                      << formatDouble(p.nEta) << ',' << formatDouble(p.modulusA.quantile(0.5)) << ','
                      << formatDouble(p.modulusA.quantile(0.9)) << ',' << formatDouble(p.modulusA.quantile(0.99))
                      << ',' << formatDouble(p.medianGap) << '\n';
            }
            for (const auto& s : r.invariance)
                invariance.push_back({{"E", s.energy},
                                      {"nEta", s.nEta},
                                      {"minMedian", s.minMedian},
                                      {"maxMedian", s.maxMedian},
                                      {"ratio", s.ratio}});
            results = {{"points", points}, {"scaleInvariance", invariance}};
            out.tables.push_back({"grid", table.str(), false});
            break;
        }
        case ExperimentKind::Identities: {
            const auto r = runIdentitySuite(config);
            json checks = json::array();
            std::ostringstream table;
            table << "check,count,worst,threshold,bound,failures\n";
            for (const auto& c : r.checks) {
                checks.push_back({{"name", c.name},
                                  {"count", c.count},
                                  {"worst", c.worst},
                                  {"threshold", c.threshold},
                                  {"bound", c.lowerBound ? "min" : "max"},
                                  {"failures", c.failures}});
                table << c.name << ',' << c.count << ',' << formatDouble(c.worst) << ',' << formatDouble(c.threshold)
                      << ',' << (c.lowerBound ? "min" : "max") << ',' << c.failures << '\n';
            }
            results = {{"passed", r.passed}, {"checks", checks}};
            out.tables.push_back({"checks", table.str(), false});
            out.passed = r.passed;
            break;
        }
    }
    return out;
}

}  // namespace wignerlab
