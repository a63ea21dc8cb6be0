#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wignerlab/ensembles.hpp"
#include "wignerlab/semicircle.hpp"
#include "wignerlab/spectral.hpp"

namespace wignerlab {

enum class ExperimentKind { Variance, Tail, Edge, Rigidity, Swap, QuadForm, LocalLaw, Identities };

std::string_view kindName(ExperimentKind kind);
// Throws config for unknown names.
ExperimentKind parseKind(const std::string& name);

enum class QuadFormMatrix { Identity, Projection, Resolvent };

struct SwapTarget {
    // Atom of the original entry component and its replacement.
    AtomDistribution from = AtomDistribution::gaussian(0.5);
    AtomDistribution to = AtomDistribution::rademacher(1.0 / 1.4142135623730951);
    std::size_t row = 0;
    std::size_t col = 1;
    bool imaginaryPart = false;
};

/// Everything that determines a run. Execution hints (workers, cache) are
/// kept out of the JSON form and the provenance hash.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Variance;
    EnsembleSpec ensemble = gueEnsemble();
    std::size_t n = 400;
    std::size_t trials = 2000;
    std::uint64_t masterSeed = 20240601;

    // variance
    double x = 0.0;
    // tail: half-open [intervalLo, intervalHi)
    double intervalLo = -1.0;
    double intervalHi = 1.0;
    // tail, edge, quadform, rigidity, variance
    std::vector<double> tGrid;
    // swap, quadform (resolvent kind)
    double energy = 0.0;
    double eta = 0.1;
    int k = 4;
    SwapTarget swap;
    // quadform
    QuadFormMatrix matrixKind = QuadFormMatrix::Identity;
    std::size_t subspaceDim = 40;
    // locallaw: eta = etaGrid values, plus c / n for each c in nEtaGrid
    std::vector<std::size_t> nGrid;
    std::vector<double> energyGrid;
    std::vector<double> etaGrid;
    std::vector<double> nEtaGrid;
    // identities
    std::vector<std::size_t> dims;
    double etaFloor = 0.05;
    std::size_t seriesInstances = 50;
    std::size_t seriesDim = 20;
    int seriesOrder = 3;
    double seriesT = 0.1;
    double seriesEnergy = 0.3;
    double seriesEta = 0.5;

    // Execution hints.
    unsigned workers = 0;  // 0 = hardware concurrency
    std::string cacheDir;  // empty disables spectrum caching
};

// Defaults reproduce the acceptance scenarios for each kind.
ExperimentConfig defaultConfig(ExperimentKind kind);

// Fills defaults for the kind named in j["kind"]; throws config on bad fields.
ExperimentConfig configFromJson(const nlohmann::json& j);
// Resolved config restricted to the fields the kind reads.
nlohmann::json configToJson(const ExperimentConfig& config);
std::string provenanceHash(const ExperimentConfig& config);

struct TailPoint {
    double threshold = 0.0;
    double frequency = 0.0;
    double stderror = 0.0;
};

struct EmpiricalSummary {
    std::size_t sampleCount = 0;
    double mean = 0.0;
    double unbiasedVariance = 0.0;
    double varianceStdError = 0.0;  // jackknife over trials
    std::vector<std::pair<double, double>> quantiles;  // (level, value)
    std::vector<TailPoint> tailCurve;  // frequency of sample >= T
    std::string provenanceHash;

    double quantile(double level) const;
};

// Type-7 (linear interpolation) sample quantile.
double sampleQuantile(std::span<const double> samples, double level);
double jackknifeVarianceStdError(std::span<const double> samples);
EmpiricalSummary summarize(std::span<const double> samples, std::span<const double> tGrid,
                           const std::string& provenance);

nlohmann::json toJson(const EmpiricalSummary& summary);
// Header "T,frequency,stderr".
std::string tailCsv(const std::vector<TailPoint>& curve);

// Produces the spectrum of trial i. Used to inject synthetic spectra.
using SpectrumSource = std::function<Spectrum(std::size_t trial)>;

// Normalized spectrum for (ensemble, n, stream); resamples on a rejected
// eigensolve and consults the on-disk cache when cacheDir is set.
Spectrum trialSpectrum(const EnsembleSpec& ensemble, std::size_t n, SeedStream stream, const std::string& cacheDir = {});

// Runs body(i) for i < count on up to `workers` threads; results keep index order.
void forEachTrial(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

struct VarianceResult {
    EmpiricalSummary counts;
    std::vector<double> rawCounts;  // N(-inf, x] per trial
    double centre = 0.0;  // n F(x)
    double meanDeviation = 0.0;
    std::optional<double> referenceValue;
    std::optional<double> ratio;
};

struct TailResult {
    EmpiricalSummary deviation;  // of |N_I - n int_I rho|
    double slope = 0.0;          // least-squares slope of log frequency vs T
    std::size_t fitPoints = 0;
};

struct EdgeResult {
    EmpiricalSummary upper;  // n^{2/3}(lambda_max - 2)
    EmpiricalSummary lower;  // n^{2/3}(-lambda_min - 2)
    double maxSymmetryZ = 0.0;
    bool symmetric = true;
};

struct RigidityResult {
    std::size_t edgeDepth = 0;  // indices with min(i, n-i+1) <= n^{1/10}
    EmpiricalSummary bulkMax;
    EmpiricalSummary edgeMax;
    std::vector<double> gamma;
    std::vector<double> meanProfile;
    std::vector<double> maxProfile;
};

struct SwapReport {
    int k = 0;
    int matchOrder = 0;
    double meanBefore = 0.0;
    double stderrBefore = 0.0;
    double meanAfter = 0.0;
    double stderrAfter = 0.0;
    double relativeGap = 0.0;
    double pairedMean = 0.0;
    double pairedStderr = 0.0;
    double unpairedStderr = 0.0;
    double zScore = 0.0;
    bool significant = false;
    std::string verdict;
};

struct QuadFormResult {
    EmpiricalSummary statistic;  // |normalized deviation|
    std::optional<double> projectionMeanOverDim;
    std::optional<double> projectionBandMiss;  // fraction outside [0.9d, 1.1d]
};

struct LocalLawPoint {
    std::size_t n = 0;
    double energy = 0.0;
    double eta = 0.0;
    double nEta = 0.0;
    EmpiricalSummary modulusA;
    double medianGap = 0.0;  // median |s_W - s_sc|
};

struct ScaleInvariance {
    double energy = 0.0;
    double nEta = 0.0;
    double minMedian = 0.0;
    double maxMedian = 0.0;
    double ratio = 0.0;
};

struct LocalLawResult {
    std::vector<LocalLawPoint> points;
    std::vector<ScaleInvariance> invariance;
};

struct IdentityCheck {
    std::string name;
    std::size_t count = 0;
    double worst = 0.0;
    double threshold = 0.0;
    // true: worst is a minimum that must reach threshold; false: a maximum
    // that must stay below it.
    bool lowerBound = false;
    std::size_t failures = 0;
};

struct IdentityReport {
    std::vector<IdentityCheck> checks;
    bool passed = true;
};

VarianceResult runVarianceExperiment(const ExperimentConfig& config, const SpectrumSource& source = {});
TailResult runTailExperiment(const ExperimentConfig& config, const SpectrumSource& source = {});
EdgeResult runEdgeExperiment(const ExperimentConfig& config, const SpectrumSource& source = {});
RigidityResult runRigidityExperiment(const ExperimentConfig& config, const SpectrumSource& source = {});
SwapReport runSwapExperiment(const ExperimentConfig& config);
QuadFormResult runQuadFormExperiment(const ExperimentConfig& config);
LocalLawResult runLocalLawSweep(const ExperimentConfig& config);
IdentityReport runIdentitySuite(const ExperimentConfig& config);

struct ResultTable {
    std::string name;
    std::string csv;
    bool isTailCurve = false;
};

/// Uniform result of any experiment: the JSON summary document (which
/// embeds the resolved config) plus CSV tables.
struct ExperimentResult {
    ExperimentConfig config;
    std::string provenanceHash;
    nlohmann::json summary;
    std::vector<ResultTable> tables;
    bool passed = true;
};

ExperimentResult runExperiment(const ExperimentConfig& config);

}  // namespace wignerlab
