#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "wignerlab/ensembles.hpp"
#include "wignerlab/experiments.hpp"

namespace wignerlab {

// Smallest k such that none of the stems (suffixed "-k" for k > 0) exists in
// dir with the matching extension.
std::size_t freeSuffix(const std::filesystem::path& dir,
                       const std::vector<std::pair<std::string, std::string>>& stemsAndExtensions);

struct ChartOptions {
    std::string title;
    std::string xLabel;
    std::string yLabel;
    bool logY = false;
    int width = 640;
    int height = 400;
};

// Polyline chart. With logY, points with y <= 0 split the line.
std::string renderLineChart(const std::vector<std::pair<double, double>>& points, const ChartOptions& options);
std::string renderTailSvg(const std::vector<TailPoint>& curve, const std::string& title);

// Writes <kind>.json and <kind>_<table>.csv (plus .svg charts when plots is
// set) into outDir, creating it if needed. Returns the written paths.
std::vector<std::filesystem::path> writeExperimentOutputs(const ExperimentResult& result,
                                                          const std::filesystem::path& outDir, bool plots);

struct SampleOutput {
    std::filesystem::path matrixFile;
    std::filesystem::path spectrumFile;
    std::string cacheKey;
};

// Samples M_n, writes matrix.csv (raw entries) and spectrum.csv (eigenvalues
// of W_n), and stores the spectrum in the cache at cacheRoot.
SampleOutput runSample(const EnsembleSpec& ensemble, std::size_t n, SeedStream stream,
                       const std::filesystem::path& outDir, const std::filesystem::path& cacheRoot);

}  // namespace wignerlab
